use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    certified_error, require_unit_interval, run_term, total_allotted, AppOptions, BudgetItem, TermInput, TraceTerm,
};
use crate::blockenc::{dilate, BlockEncoding};
use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, RngStream};
use crate::polyapprox::{power_poly, BoundedPolynomial, Parity, PowerSign};

/// Matrix functions understood by [`estimate_trace_fg`].
///
/// Functions act on singular values; for positive semidefinite inputs this is
/// the usual spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnLabel {
    Identity,
    Square,
    Cube,
    Power(f64),
}

impl FnLabel {
    fn integer_power(self) -> Option<usize> {
        match self {
            FnLabel::Identity => Some(1),
            FnLabel::Square => Some(2),
            FnLabel::Cube => Some(3),
            FnLabel::Power(c) if c.fract() == 0.0 && (1.0..=16.0).contains(&c) => Some(c as usize),
            FnLabel::Power(_) => None,
        }
    }

    /// Homogeneity degree `k` in `f(λx) = λ^k f(x)`.
    pub fn degree(self) -> f64 {
        match self {
            FnLabel::Identity => 1.0,
            FnLabel::Square => 2.0,
            FnLabel::Cube => 3.0,
            FnLabel::Power(c) => c,
        }
    }

    /// Lipschitz constant on `[0, 1]`, if finite.
    pub fn lipschitz(self) -> Option<f64> {
        let k = self.degree();
        (k >= 1.0).then_some(k)
    }

    /// Whether the approximation (and hence a singular-value floor) is needed.
    pub fn needs_delta(self) -> bool {
        self.integer_power().is_none()
    }

    pub fn eval(self, x: f64) -> f64 {
        x.powf(self.degree())
    }
}

impl fmt::Display for FnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnLabel::Identity => write!(f, "identity"),
            FnLabel::Square => write!(f, "square"),
            FnLabel::Cube => write!(f, "cube"),
            FnLabel::Power(c) => write!(f, "power:{c}"),
        }
    }
}

impl FromStr for FnLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" | "x" => Ok(FnLabel::Identity),
            "square" | "x^2" => Ok(FnLabel::Square),
            "cube" | "x^3" => Ok(FnLabel::Cube),
            other => {
                let c = other
                    .strip_prefix("power:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown function label '{other}'")))?;
                if c > 0.0 && c.is_finite() {
                    Ok(FnLabel::Power(c))
                } else {
                    Err(Error::InvalidInput(format!("power exponent {c} must be positive")))
                }
            }
        }
    }
}

/// How the target trace is recovered from the encoded blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FgMode {
    /// Encode `A/β` with `β = max(1, ‖A‖)` and undo the scale via homogeneity.
    ExactHomogeneous,
    /// Encode `A` directly (`‖A‖ ≤ 1` required); encoding errors propagate
    /// through the Lipschitz constants.
    LipschitzApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgResult {
    pub value: Complex64,
    pub f: FnLabel,
    pub g: FnLabel,
    pub mode: FgMode,
    pub term: TraceTerm,
    pub eps_budget: Vec<BudgetItem>,
    /// `(L + 1)·d·max(ε_A, ε_B)` for the encodings used.
    pub encoding_error_bound: f64,
}

struct Side {
    poly: BoundedPolynomial,
    exact: bool,
}

fn build_side(label: FnLabel, delta: f64, e: f64) -> Result<Side> {
    match label.integer_power() {
        Some(k) => Ok(Side { poly: BoundedPolynomial::monomial(k), exact: true }),
        None => {
            let FnLabel::Power(c) = label else { unreachable!("integer labels handled above") };
            let poly = power_poly(c, Parity::Even, delta, e, PowerSign::Positive)?;
            Ok(Side { poly, exact: false })
        }
    }
}

fn check_delta(name: &str, block: &ComplexMatrix, label: FnLabel, delta: f64) -> Result<()> {
    if !label.needs_delta() {
        return Ok(());
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1/2] (required by {label})")));
    }
    let smin = block.singular_values().last().copied().unwrap_or(0.0);
    if smin < delta {
        return Err(Error::Precondition(format!(
            "smallest singular value of the {name} block is {smin:.6e} < delta = {delta}"
        )));
    }
    Ok(())
}

struct Plan<'a> {
    f: FnLabel,
    g: FnLabel,
    be_a: BlockEncoding,
    be_b: BlockEncoding,
    /// Multiplier from `Tr(f(Ã)g(B̃))` to the reported value.
    outer: f64,
    eps: f64,
    delta: f64,
    mode: FgMode,
    opts: &'a AppOptions,
}

fn execute(plan: Plan<'_>) -> Result<FgResult> {
    let Plan { f, g, be_a, be_b, outer, eps, delta, mode, opts } = plan;
    let d = be_a.system_dim();
    if be_b.system_dim() != d {
        return Err(Error::InvalidDimension(format!("encodings act on {d} and {}", be_b.system_dim())));
    }
    check_delta("A", &be_a.block(), f, delta)?;
    check_delta("B", &be_b.block(), g, delta)?;

    let df = d as f64;
    // Approximated powers target x^c/2.
    let halves = [f, g].map(|l| if l.needs_delta() { 2.0 } else { 1.0 });
    let scale = outer * halves[0] * halves[1];
    // Budget at the level of Tr(P Q).
    let level = eps / scale;
    let e = level / (10.0 * df);
    let sf = build_side(f, delta, e)?;
    let sg = build_side(g, delta, e)?;
    let (ef, eg) = (if sf.exact { 0.0 } else { e }, if sg.exact { 0.0 } else { e });
    let eps_stat = level - df * (ef + eg);

    let lip = f.lipschitz().unwrap_or(f64::INFINITY).max(g.lipschitz().unwrap_or(f64::INFINITY));
    let encoding_error_bound = match mode {
        FgMode::LipschitzApprox => (lip + 1.0) * df * be_a.eps.max(be_b.eps),
        FgMode::ExactHomogeneous => 0.0,
    };

    let mut eps_budget = Vec::new();
    if !sf.exact {
        eps_budget.push(BudgetItem::new(format!("poly:{f}"), scale * df * ef, scale * df * certified_error(&sf.poly)));
    }
    if !sg.exact {
        eps_budget.push(BudgetItem::new(format!("poly:{g}"), scale * df * eg, scale * df * certified_error(&sg.poly)));
    }

    let term = run_term(
        TermInput {
            label: &format!("Tr({f}(A) {g}(B))"),
            poly_f: sf.poly,
            poly_g: sg.poly,
            be_a,
            be_b,
            eps_stat,
            k: scale,
            c: 1.0,
        },
        opts,
        &RngStream::new(opts.seed).child(0),
    )?;
    eps_budget.push(BudgetItem::new("statistical", scale * eps_stat, scale * term.std_error));
    debug_assert!(total_allotted(&eps_budget) <= eps * (1.0 + 1e-12));
    Ok(FgResult { value: term.estimate * scale, f, g, mode, term, eps_budget, encoding_error_bound })
}

/// Estimates `Tr(f(A) g(B))` to additive error `eps`.
///
/// Non-integer powers are approximated on `[δ, 1]` and require every singular
/// value of the encoded blocks to be at least `delta`; integer powers are
/// applied exactly and ignore `delta`.
pub fn estimate_trace_fg(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    f: FnLabel,
    g: FnLabel,
    eps: f64,
    delta: f64,
    mode: FgMode,
    opts: &AppOptions,
) -> Result<FgResult> {
    require_unit_interval("eps", eps)?;
    if !a.is_square() || a.rows() != b.rows() || !b.is_square() {
        return Err(Error::InvalidDimension("A and B must be square of equal size".into()));
    }
    let (na, nb) = (a.spectral_norm(), b.spectral_norm());
    let (beta_a, beta_b) = match mode {
        FgMode::ExactHomogeneous => (na.max(1.0), nb.max(1.0)),
        FgMode::LipschitzApprox => {
            if na > 1.0 + 1e-12 || nb > 1.0 + 1e-12 {
                return Err(Error::Precondition(format!(
                    "Lipschitz mode needs ||A||, ||B|| <= 1 (got {na:.6}, {nb:.6})"
                )));
            }
            if f.lipschitz().is_none() || g.lipschitz().is_none() {
                return Err(Error::InvalidInput(format!("{f} or {g} is not Lipschitz on [0, 1]")));
            }
            (1.0, 1.0)
        }
    };
    let outer = beta_a.powf(f.degree()) * beta_b.powf(g.degree());
    execute(Plan { f, g, be_a: dilate(a, beta_a)?, be_b: dilate(b, beta_b)?, outer, eps, delta, mode, opts })
}

/// Estimates `Tr(f(Ã) g(B̃))` from given `β = 1` encodings.
///
/// The result's `encoding_error_bound` bounds the additional deviation from
/// `Tr(f(A) g(B))` caused by the encodings' own errors.
pub fn estimate_trace_fg_encoded(
    be_a: &BlockEncoding,
    be_b: &BlockEncoding,
    f: FnLabel,
    g: FnLabel,
    eps: f64,
    delta: f64,
    opts: &AppOptions,
) -> Result<FgResult> {
    require_unit_interval("eps", eps)?;
    if be_a.beta != 1.0 || be_b.beta != 1.0 {
        return Err(Error::Precondition("encoded estimation needs beta = 1 encodings".into()));
    }
    if f.lipschitz().is_none() || g.lipschitz().is_none() {
        return Err(Error::InvalidInput(format!("{f} or {g} is not Lipschitz on [0, 1]")));
    }
    execute(Plan {
        f,
        g,
        be_a: be_a.clone(),
        be_b: be_b.clone(),
        outer: 1.0,
        eps,
        delta,
        mode: FgMode::LipschitzApprox,
        opts,
    })
}
