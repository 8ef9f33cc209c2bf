use std::f64::consts::PI;

use super::poly::{ApproxReport, BoundedPolynomial, Parity};
use super::MAX_DEGREE;
use crate::error::{Error, Result};

/// `points` Chebyshev (first-kind) nodes mapped to `[lo, hi]`, plus both endpoints.
pub fn chebyshev_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(1);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut xs: Vec<f64> = (0..n).map(|j| mid + half * (PI * (j as f64 + 0.5) / n as f64).cos()).collect();
    xs.push(lo);
    xs.push(hi);
    xs
}

/// Chebyshev coefficients of the degree-`n` interpolant of `f` on `[-1, 1]`.
pub fn chebyshev_interpolate(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let m = n + 1;
    let values: Vec<f64> = (0..m).map(|j| f((PI * (j as f64 + 0.5) / m as f64).cos())).collect();
    // cos(π k (2j+1) / (2m)) indexed by k(2j+1) mod 4m.
    let period = 4 * m;
    let table: Vec<f64> = (0..period).map(|t| (PI * t as f64 / (2 * m) as f64).cos()).collect();
    (0..m)
        .map(|k| {
            let s: f64 = values.iter().enumerate().map(|(j, v)| v * table[(k * (2 * j + 1)) % period]).sum();
            let w = if k == 0 { 1.0 } else { 2.0 };
            w * s / m as f64
        })
        .collect()
}

/// Search and certification knobs.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_degree: usize,
    /// Grid points per unit of degree.
    pub grid_density: usize,
    pub min_grid_points: usize,
    /// Search succeeds once the grid error is below `margin · eps`.
    pub margin: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_degree: MAX_DEGREE, grid_density: 32, min_grid_points: 2048, margin: 0.95 }
    }
}

impl FitOptions {
    fn grid_points(&self, degree: usize) -> usize {
        (self.grid_density * (degree + 1)).max(self.min_grid_points)
    }
}

struct Trial {
    poly: BoundedPolynomial,
    error: f64,
    points: usize,
}

/// Fits `f` (defined on `[-1, 1]`) with a parity-constrained interpolant of
/// minimal tried degree whose grid error on every interval in `check` is below
/// `eps`.
pub fn chebyshev_fit_parity(
    target_id: &str,
    f: impl Fn(f64) -> f64 + Sync,
    parity: Parity,
    check: &[(f64, f64)],
    eps: f64,
    opts: &FitOptions,
) -> Result<(BoundedPolynomial, ApproxReport)> {
    let attempt = |n: usize| -> Trial {
        let poly = BoundedPolynomial::new(chebyshev_interpolate(&f, n), parity);
        let points = opts.grid_points(n);
        let error = check.iter().map(|&(lo, hi)| poly.grid_error(&f, lo, hi, points)).fold(0.0, f64::max);
        Trial { poly, error, points }
    };
    search(target_id, attempt, check, eps, opts)
}

fn search(
    target_id: &str,
    attempt: impl Fn(usize) -> Trial,
    check: &[(f64, f64)],
    eps: f64,
    opts: &FitOptions,
) -> Result<(BoundedPolynomial, ApproxReport)> {
    let ok = |t: &Trial| t.error.is_finite() && t.error <= opts.margin * eps;
    let mut best: Option<(usize, Trial)> = None;
    let mut failed_below = None;
    let mut n = 0usize;
    loop {
        let t = attempt(n);
        if ok(&t) {
            best = Some((n, t));
            break;
        }
        failed_below = Some((n, t.error));
        if n >= opts.max_degree {
            break;
        }
        n = if n == 0 { 1 } else { (2 * n).min(opts.max_degree) };
    }
    let Some((mut hi, mut good)) = best else {
        let (degree, best_error) = failed_below.unwrap_or((0, f64::INFINITY));
        return Err(Error::ApproximationFailure { target: target_id.into(), best_error, degree, requested: eps });
    };
    let mut lo = failed_below.map_or(0, |(d, _)| d);
    while hi > lo + 1 {
        let mid = lo + (hi - lo) / 2;
        let t = attempt(mid);
        if ok(&t) {
            hi = mid;
            good = t;
        } else {
            lo = mid;
        }
    }
    let interval = check.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &(a, b)| (acc.0.min(a), acc.1.max(b)));
    let report = ApproxReport {
        target_id: target_id.into(),
        interval,
        requested_eps: eps,
        achieved_eps: good.error,
        degree: good.poly.degree(),
        grid_points: good.points,
    };
    Ok((good.poly, report))
}

/// Certified fit of `f` on a subinterval of `[-1, 1]`.
///
/// `f` is only sampled on `interval`; the interpolant is built in the
/// interval's own variable and re-expanded in the `[-1, 1]` basis.
pub fn chebyshev_fit_certified(
    f: impl Fn(f64) -> f64 + Sync,
    interval: (f64, f64),
    eps: f64,
    max_degree: usize,
) -> Result<(BoundedPolynomial, ApproxReport)> {
    let (lo, hi) = interval;
    if !(lo < hi && lo >= -1.0 && hi <= 1.0) {
        return Err(Error::InvalidParameter(format!("interval ({lo}, {hi}) not inside [-1, 1]")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps {eps} outside (0, 1/2)")));
    }
    let opts = FitOptions { max_degree, ..FitOptions::default() };
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let attempt = |n: usize| -> Trial {
        let local = BoundedPolynomial::new(chebyshev_interpolate(|y| f(mid + half * y), n), Parity::None);
        let global = if lo == -1.0 && hi == 1.0 {
            local
        } else {
            // p(x) = q((x − mid)/half), exact re-interpolation at degree n.
            BoundedPolynomial::new(chebyshev_interpolate(|x| local.eval((x - mid) / half), n), Parity::None)
        };
        let points = opts.grid_points(n);
        let error = global.grid_error(&f, lo, hi, points);
        Trial { poly: global, error, points }
    };
    let (poly, report) = search("custom", attempt, &[interval], eps, &opts)?;
    let poly = poly.certify_error(&f, lo, hi, eps);
    Ok((poly, report))
}
