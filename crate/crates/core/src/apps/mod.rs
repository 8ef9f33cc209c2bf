//! Applications built on the two-party trace estimator.
//!
//! Every application reduces to one or more estimates of `Tr(P Q)` with `P`
//! held by Alice and `Q` by Bob. The requested accuracy is split into
//! polynomial-approximation and statistical shares; each share is listed in
//! the result's `eps_budget` so that the split can be audited.
//!
//! Iteration counts are calibrated: a short pilot run estimates the
//! per-iteration variance `v` and the main run uses `N = ⌈9·s·v/ε_stat²⌉`
//! (`s` a safety factor), which puts the standard error at `ε_stat/(3√s)`.

mod divergence;
mod hamsim;
mod linsolve;
mod trace_fg;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use divergence::{relative_entropy, renyi_entropy, DivergenceKind, DivergenceResult, RenyiParams};
pub use hamsim::{commutator_norm, hamiltonian_expectation, SimOptions, SimResult};
pub use linsolve::{linear_solve, SolveResult};
pub use trace_fg::{estimate_trace_fg, estimate_trace_fg_encoded, FgMode, FgResult, FnLabel};

use crate::blockenc::{from_purification, BlockEncoding};
use crate::error::{Error, Result};
use crate::numkit::{hermitian_eig, ComplexMatrix, HermitianEig, RngStream};
use crate::parallel::Execution;
use crate::polyapprox::{BoundedPolynomial, CertKind};
use crate::protocol::{median_of_means, ProtocolConfig, TraceEstimate};

/// Sampling controls shared by all applications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppOptions {
    pub seed: u64,
    /// Fixed iteration count; disables calibration when set.
    pub n_iterations: Option<usize>,
    /// Fixed shots per iteration; defaults to `⌈c_m d²⌉`.
    pub m: Option<usize>,
    pub c_m: f64,
    pub pilot_iterations: usize,
    pub safety: f64,
    pub min_iterations: usize,
    pub max_iterations: usize,
    /// Independent groups combined by a componentwise median.
    pub groups: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for AppOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            n_iterations: None,
            m: None,
            c_m: 16.0,
            pilot_iterations: 4000,
            safety: 1.5,
            min_iterations: 100,
            max_iterations: 20_000_000,
            groups: 1,
            execution: Execution::default(),
        }
    }
}

impl AppOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.pilot_iterations < 2 || !(self.safety > 0.0) || !(self.c_m > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid sampling options: {self:?}")));
        }
        if self.n_iterations == Some(0) || self.m == Some(0) {
            return Err(Error::InvalidParameter("N and m must be positive".into()));
        }
        Ok(())
    }

    fn shots(&self, d: usize) -> usize {
        self.m.unwrap_or_else(|| (self.c_m * (d * d) as f64).ceil().max(1.0) as usize)
    }
}

/// One share of an error budget, in the units of the reported quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetItem {
    pub label: String,
    pub allotted: f64,
    /// Certified error for polynomial shares, one standard error for
    /// statistical shares.
    pub achieved: f64,
}

impl BudgetItem {
    fn new(label: impl Into<String>, allotted: f64, achieved: f64) -> Self {
        Self { label: label.into(), allotted, achieved }
    }
}

/// Sum of the allotted shares.
pub fn total_allotted(items: &[BudgetItem]) -> f64 {
    items.iter().map(|b| b.allotted).sum()
}

/// One protocol run and the constants that map it back to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTerm {
    pub label: String,
    /// Raw estimate of `Tr(P Q)`.
    pub estimate: Complex64,
    /// Multiplier from `Tr(P Q)` to the target trace.
    pub k: f64,
    /// Bound on the target functions over the approximation interval.
    pub c: f64,
    pub std_error: f64,
    pub eps_stat: f64,
    pub n_iterations: usize,
    pub m: usize,
    pub groups: usize,
    pub queries: u64,
    /// Set when the calibrated `N` exceeded `max_iterations`.
    pub capped: bool,
}

pub(crate) struct TermInput<'a> {
    pub label: &'a str,
    pub poly_f: BoundedPolynomial,
    pub poly_g: BoundedPolynomial,
    pub be_a: BlockEncoding,
    pub be_b: BlockEncoding,
    pub eps_stat: f64,
    pub k: f64,
    pub c: f64,
}

const PILOT: u64 = 0x5049_4c54;
const MAIN: u64 = 0x4d41_494e;

/// Estimates `Tr(P_f(Ã) Q_g(B̃))` to standard error about `eps_stat/3`.
pub(crate) fn run_term(input: TermInput<'_>, opts: &AppOptions, stream: &RngStream) -> Result<TraceTerm> {
    opts.validate()?;
    if !(input.eps_stat > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{}: statistical budget {} is not positive",
            input.label, input.eps_stat
        )));
    }
    let d = input.be_a.system_dim();
    let m = opts.shots(d);
    let cfg = ProtocolConfig::new(1, m, opts.seed, input.poly_f, input.poly_g, input.be_a, input.be_b)?;
    let prep = cfg.prepare()?.with_execution(opts.execution);

    let (n, capped) = match opts.n_iterations {
        Some(n) => (n, false),
        None => {
            let pilot =
                prep.clone().with_samples(opts.pilot_iterations, m).with_stream(stream.child(PILOT)).estimate()?;
            let v = pilot.variance_per_iteration();
            let want = (9.0 * opts.safety * v / (input.eps_stat * input.eps_stat)).ceil();
            let want = if want.is_finite() { want as usize } else { opts.max_iterations };
            let n = want.max(opts.min_iterations);
            (n.min(opts.max_iterations), n > opts.max_iterations)
        }
    };

    let runs: Vec<TraceEstimate> = (0..opts.groups)
        .map(|g| prep.clone().with_samples(n, m).with_stream(stream.descend(&[MAIN, g as u64])).estimate())
        .collect::<Result<_>>()?;
    let values: Vec<Complex64> = runs.iter().map(|r| r.value).collect();
    let estimate = if values.len() == 1 { values[0] } else { median_of_means(&values)? };
    let var = runs.iter().map(|r| r.empirical_variance).sum::<f64>() / (runs.len() * runs.len()) as f64;
    Ok(TraceTerm {
        label: input.label.to_string(),
        estimate,
        k: input.k,
        c: input.c,
        std_error: var.sqrt(),
        eps_stat: input.eps_stat,
        n_iterations: n,
        m,
        groups: opts.groups,
        queries: runs.iter().map(|r| r.n_queries_simulated).sum(),
        capped,
    })
}

/// Largest observed deviation over a polynomial's error certificates.
pub(crate) fn certified_error(p: &BoundedPolynomial) -> f64 {
    p.certified.iter().filter(|c| c.kind == CertKind::Error).map(|c| c.max_observed).fold(0.0, f64::max)
}

/// Checks that `rho` is a density matrix on a power-of-two dimension and
/// returns its eigendecomposition.
pub(crate) fn check_density(name: &str, rho: &ComplexMatrix) -> Result<HermitianEig> {
    if !rho.is_square() || !rho.rows().is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "{name} must be square with power-of-two dimension, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    if !rho.is_finite() {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    let defect = rho.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::ContractViolation(format!("{name} is not Hermitian (defect {defect:.3e})")));
    }
    let eig = hermitian_eig(rho)?;
    let tr: f64 = eig.eigenvalues.iter().sum();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("{name} has trace {tr}, expected 1")));
    }
    if eig.min_eigenvalue() < -1e-10 {
        return Err(Error::InvalidInput(format!(
            "{name} is not positive semidefinite (min eigenvalue {:.3e})",
            eig.min_eigenvalue()
        )));
    }
    Ok(eig)
}

pub(crate) fn require_min_eigenvalue(name: &str, eig: &HermitianEig, delta: f64) -> Result<()> {
    let lo = eig.min_eigenvalue();
    if lo < delta {
        return Err(Error::Precondition(format!("min eigenvalue of {name} is {lo:.6e} < delta = {delta}")));
    }
    Ok(())
}

pub(crate) fn require_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} outside (0, 1)")))
    }
}

/// Purified-access encoding of a density matrix: `|ψ⟩ = Σ √λ_i |i⟩|v_i⟩`.
pub(crate) fn state_encoding(rho: &ComplexMatrix, eig: &HermitianEig) -> Result<BlockEncoding> {
    let d = rho.rows();
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    let norm: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let w = (l.max(0.0) / norm).sqrt();
        for j in 0..d {
            psi[i * d + j] = eig.eigenvectors.get(j, i) * w;
        }
    }
    let (_, be) = from_purification(&psi, d.trailing_zeros())?;
    Ok(be)
}
