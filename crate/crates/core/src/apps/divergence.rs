use serde::{Deserialize, Serialize};

use super::{
    certified_error, check_density, require_min_eigenvalue, require_unit_interval, run_term, state_encoding,
    AppOptions, BudgetItem, TermInput, TraceTerm,
};
use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, HermitianEig, RngStream};
use crate::polyapprox::{log_poly, power_poly, BoundedPolynomial, Parity, PowerSign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DivergenceKind {
    RelativeEntropy,
    Renyi { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub value: f64,
    pub kind: DivergenceKind,
    pub eps: f64,
    pub delta: Option<f64>,
    pub trace_terms: Vec<TraceTerm>,
    pub eps_budget: Vec<BudgetItem>,
    /// Lower bound on the trace used to convert trace error into log error.
    pub t_floor: Option<f64>,
    /// Trace estimate underlying a Rényi value.
    pub trace_estimate: Option<f64>,
}

fn check_pair(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<(HermitianEig, HermitianEig)> {
    if rho.rows() != sigma.rows() {
        return Err(Error::InvalidDimension(format!(
            "rho is {}-dimensional, sigma is {}-dimensional",
            rho.rows(),
            sigma.rows()
        )));
    }
    Ok((check_density("rho", rho)?, check_density("sigma", sigma)?))
}

/// `D(ρ‖σ) = Tr ρ ln ρ − Tr ρ ln σ` to additive error `eps`.
///
/// Both terms use `f = x` on `ρ` for Alice and the log polynomial on `ρ`
/// resp. `σ` for Bob, with `Tr ρ ln X ≈ −K·Tr(ρ P_ln(X))`. The `Tr ρ ln ρ`
/// term is computed by Alice alone, holding both roles.
pub fn relative_entropy(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    eps: f64,
    delta: f64,
    opts: &AppOptions,
) -> Result<DivergenceResult> {
    require_unit_interval("eps", eps)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1]")));
    }
    let (er, es) = check_pair(rho, sigma)?;
    require_min_eigenvalue("rho", &er, delta)?;
    require_min_eigenvalue("sigma", &es, delta)?;

    let k = 2.0 * (2.0 / delta).ln();
    let e_poly = eps / (10.0 * k);
    let e_stat = 2.0 * eps / (5.0 * k);
    let (p_ln, k) = log_poly(delta, e_poly)?;
    let achieved = certified_error(&p_ln);
    let be_rho = state_encoding(rho, &er)?;
    let be_sigma = state_encoding(sigma, &es)?;
    let c = (1.0f64).max((1.0 / delta).ln() / k);
    let root = RngStream::new(opts.seed);

    let self_term = run_term(
        TermInput {
            label: "Tr(rho P_ln(rho))",
            poly_f: BoundedPolynomial::identity(),
            poly_g: p_ln.clone(),
            be_a: be_rho.clone(),
            be_b: be_rho.clone(),
            eps_stat: e_stat,
            k,
            c,
        },
        opts,
        &root.child(1),
    )?;
    let cross_term = run_term(
        TermInput {
            label: "Tr(rho P_ln(sigma))",
            poly_f: BoundedPolynomial::identity(),
            poly_g: p_ln,
            be_a: be_rho,
            be_b: be_sigma,
            eps_stat: e_stat,
            k,
            c,
        },
        opts,
        &root.child(2),
    )?;
    let value = k * (cross_term.estimate.re - self_term.estimate.re);
    let eps_budget = vec![
        BudgetItem::new("poly:ln(rho)", k * e_poly, k * achieved),
        BudgetItem::new("poly:ln(sigma)", k * e_poly, k * achieved),
        BudgetItem::new("stat:Tr(rho ln rho)", k * e_stat, k * self_term.std_error),
        BudgetItem::new("stat:Tr(rho ln sigma)", k * e_stat, k * cross_term.std_error),
    ];
    Ok(DivergenceResult {
        value,
        kind: DivergenceKind::RelativeEntropy,
        eps,
        delta: Some(delta),
        trace_terms: vec![self_term, cross_term],
        eps_budget,
        t_floor: None,
        trace_estimate: None,
    })
}

/// Side information for [`renyi_entropy`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RenyiParams {
    /// Lower bound on the eigenvalues of both states.
    pub delta: Option<f64>,
    /// Upper bound on both ranks (used for `α < 1` without `delta`).
    pub rank: Option<usize>,
    /// Override for the lower bound on `Tr ρ^α σ^{1−α}`.
    pub t_floor: Option<f64>,
}

fn numerical_rank(eig: &HermitianEig) -> usize {
    eig.eigenvalues.iter().filter(|&&l| l > 1e-10).count()
}

/// Largest trace error keeping `|ln T̂ − ln T|/|α − 1| ≤ eps` when `T ≥ floor`.
fn trace_tolerance(alpha: f64, eps: f64, floor: f64) -> f64 {
    let x = (alpha - 1.0).abs() * eps;
    x * floor / (1.0 + x)
}

/// Petz divergence `ln Tr(ρ^α σ^{1−α}) / (α − 1)` to additive error `eps`.
///
/// `α > 1` requires `delta` and uses `x^α/2` on `ρ` against `δ^{α−1}x^{1−α}/2`
/// on `σ`. `α < 1` uses `x^α/2` and `x^{1−α}/2`; with `delta` the eigenvalue
/// floor fixes the approximation interval, otherwise it is derived from the
/// rank bound as `δ = (ε′)^{1/ᾱ}`, `ε′ = ε_tr/(8r)`, `ᾱ = min(α, 1−α)`.
///
/// The log step needs a lower bound `T_floor` on the trace: `1` for `α > 1`,
/// `δ^{1−α}` for `α < 1` with `delta`, and the heuristic `δ^{|1−α| r}` in the
/// rank-only case; `t_floor` overrides all three.
pub fn renyi_entropy(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    alpha: f64,
    eps: f64,
    params: &RenyiParams,
    opts: &AppOptions,
) -> Result<DivergenceResult> {
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive and different from 1")));
    }
    require_unit_interval("eps", eps)?;
    if let Some(f) = params.t_floor {
        if !(f > 0.0) {
            return Err(Error::InvalidParameter(format!("t_floor = {f} must be positive")));
        }
    }
    let (er, es) = check_pair(rho, sigma)?;
    let d = rho.rows() as f64;

    let check_delta = |delta: f64| -> Result<()> {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1/2]")));
        }
        require_min_eigenvalue("rho", &er, delta)?;
        require_min_eigenvalue("sigma", &es, delta)
    };

    // (delta, Tr(PQ) multiplier, trace floor, sign and exponent of the σ side)
    let (delta, scale, floor, g_sign, g_exp) = if alpha > 1.0 {
        let delta = params
            .delta
            .ok_or_else(|| Error::InvalidParameter("alpha > 1 requires an eigenvalue floor delta".into()))?;
        check_delta(delta)?;
        (delta, 4.0 * delta.powf(1.0 - alpha), params.t_floor.unwrap_or(1.0), PowerSign::Negative, alpha - 1.0)
    } else if let Some(delta) = params.delta {
        check_delta(delta)?;
        (delta, 4.0, params.t_floor.unwrap_or(delta.powf(1.0 - alpha)), PowerSign::Positive, 1.0 - alpha)
    } else {
        let r =
            params.rank.ok_or_else(|| Error::InvalidParameter("alpha < 1 requires delta or a rank bound".into()))?;
        let actual = numerical_rank(&er).max(numerical_rank(&es));
        if r == 0 || actual > r {
            return Err(Error::Precondition(format!("rank bound {r} below the actual rank {actual}")));
        }
        let abar = alpha.min(1.0 - alpha);
        let eps_prime = trace_tolerance(alpha, eps, params.t_floor.unwrap_or(1.0)) / 4.0 / (8.0 * r as f64);
        let delta = eps_prime.powf(1.0 / abar).min(0.5);
        let floor = params.t_floor.unwrap_or(delta.powf((1.0 - alpha).abs() * r as f64));
        (delta, 4.0, floor, PowerSign::Positive, 1.0 - alpha)
    };

    // Trace-level tolerance, then the same at the level of Tr(P Q).
    let big_e = trace_tolerance(alpha, eps, floor);
    let level = big_e / scale;
    let e_poly = level / (10.0 * d);
    let e_stat = 4.0 * level / 5.0;

    let p = power_poly(alpha, Parity::Even, delta, e_poly, PowerSign::Positive)?;
    let q = power_poly(g_exp, Parity::Even, delta, e_poly, g_sign)?;
    let (ap, aq) = (certified_error(&p), certified_error(&q));
    let term = run_term(
        TermInput {
            label: "Tr(P_alpha(rho) Q_alpha(sigma))",
            poly_f: p,
            poly_g: q,
            be_a: state_encoding(rho, &er)?,
            be_b: state_encoding(sigma, &es)?,
            eps_stat: e_stat,
            k: scale,
            c: 0.5,
        },
        opts,
        &RngStream::new(opts.seed).child(3),
    )?;

    let trace = scale * term.estimate.re;
    if !(trace > 0.0) || trace < floor - big_e {
        return Err(Error::UnreliableLog { estimate: trace, floor });
    }
    let value = trace.ln() / (alpha - 1.0);
    // Output-level shares: trace error x maps to at most eps·x/E.
    let to_out = |x: f64| eps * x / big_e;
    let eps_budget = vec![
        BudgetItem::new("poly:rho^alpha", to_out(scale * d * e_poly), to_out(scale * d * ap)),
        BudgetItem::new("poly:sigma^(1-alpha)", to_out(scale * d * e_poly), to_out(scale * d * aq)),
        BudgetItem::new("statistical", to_out(scale * e_stat), to_out(scale * term.std_error)),
    ];
    Ok(DivergenceResult {
        value,
        kind: DivergenceKind::Renyi { alpha },
        eps,
        delta: Some(delta),
        trace_terms: vec![term],
        eps_budget,
        t_floor: Some(floor),
        trace_estimate: Some(trace),
    })
}
