use super::chebyshev::{chebyshev_fit_parity, FitOptions};
use super::poly::{BoundedPolynomial, CertKind, Parity};
use super::window::{Hole, Rectangle};
use crate::error::{Error, Result};

/// Which power family [`power_poly`] targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSign {
    /// `x^c / 2`.
    Positive,
    /// `δ^c x^{-c} / 2`.
    Negative,
}

fn check_open(name: &str, v: f64, lo: f64, hi: f64, hi_inclusive: bool) -> Result<()> {
    let ok = v > lo && if hi_inclusive { v <= hi } else { v < hi };
    if ok {
        Ok(())
    } else {
        let close = if hi_inclusive { ']' } else { ')' };
        Err(Error::InvalidParameter(format!("{name} = {v} outside ({lo}, {hi}{close}")))
    }
}

/// Fails if any recorded certificate is violated.
fn finalize(target: &str, p: BoundedPolynomial, eps: f64) -> Result<BoundedPolynomial> {
    match p.certified.iter().find(|c| !c.holds()) {
        None => Ok(p),
        Some(c) => Err(Error::ApproximationFailure {
            target: format!("{target} ({} certificate)", c.label),
            best_error: c.max_observed,
            degree: p.degree(),
            requested: if c.kind == CertKind::SupNorm { c.bound } else { eps },
        }),
    }
}

fn signed(parity: Parity, x: f64, magnitude: f64) -> f64 {
    if parity == Parity::Odd && x < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Even polynomial close to `ln(1/x)/K` on `[δ, 1]`, `K = 2 ln(2/δ)`.
pub fn log_poly(delta: f64, eps: f64) -> Result<(BoundedPolynomial, f64)> {
    check_open("delta", delta, 0.0, 1.0, true)?;
    check_open("eps", eps, 0.0, 0.5, false)?;
    let k = 2.0 * (2.0 / delta).ln();
    let hole = Hole::between(delta / 2.0, delta, eps);
    let target = |x: f64| {
        let w = hole.eval(x);
        if w == 0.0 {
            0.0
        } else {
            (1.0 / x.abs()).ln() / k * w
        }
    };
    let (p, _) = chebyshev_fit_parity("log", target, Parity::Even, &[(-1.0, 1.0)], eps / 2.0, &FitOptions::default())?;
    let p = p.certify_error(|x| (1.0 / x).ln() / k, delta, 1.0, eps).certify_sup(-1.0, 1.0, 1.0);
    Ok((finalize("log", p, eps)?, k))
}

/// Odd polynomial close to `3δ/(4x)` on `[-1, -δ] ∪ [δ, 1]`.
pub fn inverse_poly(delta: f64, eps: f64) -> Result<BoundedPolynomial> {
    check_open("delta", delta, 0.0, 0.5, true)?;
    check_open("eps", eps, 0.0, 0.5, true)?;
    let hole = Hole::between(delta / 2.0, delta, eps);
    let c = 0.75 * delta;
    let target = |x: f64| {
        let w = hole.eval(x);
        if w == 0.0 {
            0.0
        } else {
            c / x * w
        }
    };
    let (p, _) =
        chebyshev_fit_parity("inverse", target, Parity::Odd, &[(-1.0, 1.0)], eps / 2.0, &FitOptions::default())?;
    let p = p
        .certify_error(|x| c / x, delta, 1.0, eps)
        .certify_error(|x| c / x, -1.0, -delta, eps)
        .certify_sup(-1.0, 1.0, 1.0);
    finalize("inverse", p, eps)
}

/// Power-function polynomial on `[δ, 1]`; see [`PowerSign`] for the two targets.
///
/// Positive powers also satisfy `|P(x)| ≤ |x|^c/2 + ε` on all of `[-1, 1]`.
pub fn power_poly(c: f64, parity: Parity, delta: f64, eps: f64, sign: PowerSign) -> Result<BoundedPolynomial> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent c = {c} must be positive")));
    }
    if parity == Parity::None {
        return Err(Error::InvalidParameter("power_poly requires even or odd parity".into()));
    }
    check_open("delta", delta, 0.0, 0.5, true)?;
    check_open("eps", eps, 0.0, 0.5, true)?;
    let opts = FitOptions::default();
    match sign {
        PowerSign::Positive => {
            let f = move |x: f64| 0.5 * x.abs().powf(c);
            let hole = Hole::between(delta / 2.0, delta, eps);
            let target = |x: f64| signed(parity, x, f(x) * hole.eval(x));
            let (p, _) = chebyshev_fit_parity("positive_power", target, parity, &[(-1.0, 1.0)], eps / 2.0, &opts)?;
            let p = p.certify_error(f, delta, 1.0, eps).certify_envelope(f, -1.0, 1.0, eps).certify_sup(-1.0, 1.0, 1.0);
            finalize("positive_power", p, eps)
        }
        PowerSign::Negative => {
            let dc = delta.powf(c);
            let f = move |x: f64| 0.5 * dc * x.abs().powf(-c);
            let width = 1.0 / (4.0 * c.max(1.0));
            let hole = Hole::between(delta * (1.0 - width), delta, eps);
            let target = |x: f64| {
                let w = hole.eval(x);
                if w == 0.0 {
                    0.0
                } else {
                    signed(parity, x, f(x) * w)
                }
            };
            let (p, _) = chebyshev_fit_parity("negative_power", target, parity, &[(-1.0, 1.0)], eps / 2.0, &opts)?;
            let p = p.certify_error(f, delta, 1.0, eps).certify_sup(-1.0, 1.0, 1.0);
            finalize("negative_power", p, eps)
        }
    }
}

/// Even polynomial approximating the indicator of `[-t, t]`: within `[1−ε′, 1]`
/// on `[-t+δ′, t−δ′]`, within `[0, ε′]` outside `[-t−δ′, t+δ′]`, and in `[0, 1]`
/// throughout.
pub fn rect_poly(t: f64, delta_p: f64, eps_p: f64) -> Result<BoundedPolynomial> {
    check_open("delta_p", delta_p, 0.0, 0.5, false)?;
    check_open("eps_p", eps_p, 0.0, 0.5, false)?;
    if !(-1.0..=1.0).contains(&t) || t <= delta_p {
        return Err(Error::InvalidParameter(format!("band geometry infeasible: t = {t}, delta_p = {delta_p}")));
    }
    let rect = Rectangle::new(t, delta_p, eps_p / 4.0);
    let target = |x: f64| eps_p / 4.0 + (1.0 - eps_p / 2.0) * rect.eval(x);
    let (mut p, _) =
        chebyshev_fit_parity("rect", target, Parity::Even, &[(-1.0, 1.0)], eps_p / 8.0, &FitOptions::default())?;
    let half = eps_p / 2.0;
    p = p.certify_labeled("plateau", |_| 1.0 - half, 0.0, t - delta_p, half);
    if t + delta_p < 1.0 {
        p = p.certify_labeled("stopband", |_| half, t + delta_p, 1.0, half);
    }
    p = p.certify_labeled("range", |_| 0.5, -1.0, 1.0, 0.5).certify_sup(-1.0, 1.0, 1.0);
    finalize("rect", p, eps_p)
}

/// `P(x) = P*(x) + P*(−x)`: doubles even coefficients, drops odd ones.
pub fn symmetrize_even(p_star: &BoundedPolynomial) -> BoundedPolynomial {
    let coeffs = p_star.cheb_coeffs.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { 2.0 * c } else { 0.0 }).collect();
    BoundedPolynomial::new(coeffs, Parity::Even).with_scale(p_star.scale)
}

/// Polynomial close to `f` on `[x0 − r + δ, x0 + r − δ]` and negligible outside
/// `[x0 − r, x0 + r]`.
///
/// `f` must be finite on `[x0 − r, x0 + r]`; it is extended by its endpoint
/// values beyond. When `max |f| + eps > 1` the output is divided by that
/// amount and the divisor recorded in `scale`; certificates are then in the
/// normalized units.
pub fn localized_poly(
    f: impl Fn(f64) -> f64 + Sync,
    x0: f64,
    r: f64,
    delta: f64,
    eps: f64,
) -> Result<BoundedPolynomial> {
    check_open("eps", eps, 0.0, 0.5, false)?;
    if !(r > delta && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("need r > delta > 0, got r = {r}, delta = {delta}")));
    }
    let (a, b) = (x0 - r, x0 + r);
    let bound = super::chebyshev_grid(a, b, 4096).into_iter().map(|x| f(x).abs()).fold(0.0, f64::max);
    if !bound.is_finite() {
        return Err(Error::InvalidParameter("f is not finite on the localization interval".into()));
    }
    let eta = eps / (8.0 * bound.max(1.0));
    let rect = Rectangle::new(r - delta / 2.0, delta / 2.0, eta);
    let target = |x: f64| f(x.clamp(a, b)) * rect.eval(x - x0);
    let (p, _) =
        chebyshev_fit_parity("localized", target, Parity::None, &[(-1.0, 1.0)], eps / 2.0, &FitOptions::default())?;
    let scale = (bound + eps).max(1.0);
    let lo = (a + delta).max(-1.0);
    let hi = (b - delta).min(1.0);
    let normalized = BoundedPolynomial::new(p.cheb_coeffs.iter().map(|c| c / scale).collect(), Parity::None)
        .with_scale(scale)
        .certify_error(|x| f(x) / scale, lo, hi, eps / scale)
        .certify_sup(-1.0, 1.0, 1.0);
    finalize("localized", normalized, eps)
}
