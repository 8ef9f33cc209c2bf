use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{PreparedProtocol, ProtocolConfig};
use super::estimator::TraceEstimate;
use super::labels;
use crate::error::{Error, Result};

/// Constants of `N = ⌈c_N/ε²⌉`, `m = ⌈c_m d²⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub c_n: f64,
    pub c_m: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self { c_n: 1.0, c_m: 1.0 }
    }
}

/// `(N, m)` with the default constants.
pub fn plan_samples(d: usize, eps: f64) -> Result<(usize, usize)> {
    plan_samples_with(d, eps, SamplePlan::default())
}

pub fn plan_samples_with(d: usize, eps: f64, plan: SamplePlan) -> Result<(usize, usize)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    if d == 0 || !(plan.c_n > 0.0 && plan.c_m > 0.0) {
        return Err(Error::InvalidParameter(format!("d = {d}, plan = {plan:?}")));
    }
    let eps = eps.min(1.0);
    let n = (plan.c_n / (eps * eps) - 1e-9).ceil().max(1.0) as usize;
    let m = (plan.c_m * (d * d) as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok((n, m))
}

/// Independent replays with fresh probe states and shots per replay.
pub fn replicate(p: &PreparedProtocol, replications: usize) -> Result<Vec<TraceEstimate>> {
    let base = p.stream.clone();
    p.execution
        .map_collect(replications, |r| p.clone().with_stream(base.descend(&[labels::REPLAY, r as u64])).estimate())
        .into_iter()
        .collect()
}

/// Sample variance `Σ|T_r − T̄|²/(R − 1)` over independent replays.
pub fn empirical_variance(cfg: &ProtocolConfig, replications: usize) -> Result<f64> {
    if replications < 2 {
        return Err(Error::InvalidParameter("need at least 2 replications".into()));
    }
    let values: Vec<Complex64> = replicate(&cfg.prepare()?, replications)?.iter().map(|t| t.value).collect();
    Ok(sample_variance(&values))
}

pub(crate) fn sample_variance(values: &[Complex64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Componentwise median of independent estimates.
pub fn median_of_means(values: &[Complex64]) -> Result<Complex64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("median of an empty set".into()));
    }
    Ok(Complex64::new(median(values.iter().map(|v| v.re).collect()), median(values.iter().map(|v| v.im).collect())))
}
