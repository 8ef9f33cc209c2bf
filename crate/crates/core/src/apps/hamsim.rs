use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_density, require_unit_interval, run_term, AppOptions, BudgetItem, TermInput, TraceTerm};
use crate::blockenc::{dilate, dilate_perturbed, BlockEncoding};
use crate::error::{Error, Result};
use crate::numkit::{hermitian_eig, ComplexMatrix, HermitianEig, RngStream};
use crate::polyapprox::BoundedPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    /// Time cap is `t_cap_const/√d`.
    pub t_cap_const: f64,
    /// Spectral-norm perturbation injected into both encodings.
    pub perturb: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { t_cap_const: 1.0, perturb: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub estimate: f64,
    /// `Tr(M e^{−iHt} ρ e^{iHt})` with `H = H₁ + H₂`.
    pub exact: f64,
    /// Value of the product-formula target `Tr(M U₁U₂ ρ V₂V₁)`.
    pub split_exact: f64,
    pub commutator_norm: f64,
    pub t: f64,
    pub eps: f64,
    /// Guaranteed bound on `|estimate − exact|` (up to the statistical
    /// confidence of the sampling share).
    pub error_bound: f64,
    /// Deviation caused by perturbed encodings, `ε_P + d·ε_Q`.
    pub encoding_error: f64,
    pub term: TraceTerm,
    pub eps_budget: Vec<BudgetItem>,
}

/// `‖H₁H₂ − H₂H₁‖`.
pub fn commutator_norm(h1: &ComplexMatrix, h2: &ComplexMatrix) -> Result<f64> {
    if !h1.is_square() || h1.rows() != h2.rows() || h1.cols() != h2.cols() {
        return Err(Error::InvalidDimension(format!(
            "commutator of {}x{} and {}x{}",
            h1.rows(),
            h1.cols(),
            h2.rows(),
            h2.cols()
        )));
    }
    Ok((&(h1 * h2) - &(h2 * h1)).spectral_norm())
}

fn hermitian(name: &str, h: &ComplexMatrix, d: usize) -> Result<HermitianEig> {
    if !h.is_square() || h.rows() != d {
        return Err(Error::InvalidDimension(format!("{name} is {}x{}, expected {d}x{d}", h.rows(), h.cols())));
    }
    hermitian_eig(h).map_err(|e| match e {
        Error::ContractViolation(msg) => Error::ContractViolation(format!("{name}: {msg}")),
        other => other,
    })
}

/// `e^{−iHt}`.
fn evolution(eig: &HermitianEig, t: f64) -> ComplexMatrix {
    eig.map(|l| Complex64::from_polar(1.0, -l * t))
}

fn encode(x: &ComplexMatrix, perturb: Option<f64>, stream: &RngStream) -> Result<BlockEncoding> {
    match perturb {
        Some(p) => dilate_perturbed(x, 1.0, p, stream),
        None => dilate(x, 1.0),
    }
}

/// Estimates `Tr(M e^{−i(H₁+H₂)t} ρ e^{i(H₁+H₂)t})` with `H₁` known to Alice
/// and `H₂`, `ρ` known to Bob.
///
/// Alice holds `P = e^{iH₁t} M e^{−iH₁t}` and Bob `Q = e^{−iH₂t} ρ e^{iH₂t}`;
/// the protocol estimates `S = Tr(P Q)`, whose distance from the target is
/// controlled by `‖[H₁, H₂]‖`. All of `eps` is spent on sampling.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian_expectation(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    m: &ComplexMatrix,
    rho: &ComplexMatrix,
    t: f64,
    eps: f64,
    sim: &SimOptions,
    opts: &AppOptions,
) -> Result<SimResult> {
    require_unit_interval("eps", eps)?;
    check_density("rho", rho)?;
    let d = rho.rows();
    let e1 = hermitian("H1", h1, d)?;
    let e2 = hermitian("H2", h2, d)?;
    let em = hermitian("M", m, d)?;
    let m_norm = em.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    if m_norm > 1.0 + 1e-12 {
        return Err(Error::ScaleViolation { norm: m_norm });
    }
    let cap = sim.t_cap_const / (d as f64).sqrt();
    if !t.is_finite() || t.abs() > cap {
        return Err(Error::InvalidParameter(format!(
            "|t| = {t} exceeds the cap {cap:.6} = {}/sqrt(d)",
            sim.t_cap_const
        )));
    }
    if let Some(p) = sim.perturb {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("perturbation {p} outside [0, 1)")));
        }
    }

    let (u1, u2) = (evolution(&e1, t), evolution(&e2, t));
    let p = &(&u1.adjoint() * m) * &u1;
    let q = &(&u2 * rho) * &u2.adjoint();
    let split_exact = p.trace_product(&q).re;
    let eh = hermitian_eig(&(h1 + h2))?;
    let u = evolution(&eh, t);
    let exact = m.trace_product(&(&(&u * rho) * &u.adjoint())).re;
    let comm = commutator_norm(h1, h2)?;

    let root = RngStream::new(opts.seed);
    let be_p = encode(&p, sim.perturb, &root.child(20))?;
    let be_q = encode(&q, sim.perturb, &root.child(21))?;
    let encoding_error = be_p.eps + d as f64 * be_q.eps;

    let term = run_term(
        TermInput {
            label: "Tr(P Q)",
            poly_f: BoundedPolynomial::identity(),
            poly_g: BoundedPolynomial::identity(),
            be_a: be_p,
            be_b: be_q,
            eps_stat: eps,
            k: 1.0,
            c: 1.0,
        },
        opts,
        &root.child(4),
    )?;
    let eps_budget = vec![BudgetItem::new("statistical", eps, term.std_error)];
    Ok(SimResult {
        estimate: term.estimate.re,
        exact,
        split_exact,
        commutator_norm: comm,
        t,
        eps,
        error_bound: comm + eps + encoding_error,
        encoding_error,
        term,
        eps_budget,
    })
}
