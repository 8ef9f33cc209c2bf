use statrs::function::erf::{erf, erfc, erfc_inv};

/// Smoothed indicator of `[-t, t]`: `½[erf(κ(x+t)) − erf(κ(x−t))]`.
///
/// With `κ = erfc⁻¹(η)/δ′` the value is within `η/2` of 0 outside
/// `[-t−δ′, t+δ′]` and within `η/2` of 1 on `[-t+δ′, t−δ′]` (plus the
/// negligible opposite tail).
#[derive(Debug, Clone, Copy)]
pub struct Rectangle {
    pub t: f64,
    pub kappa: f64,
}

impl Rectangle {
    pub fn new(t: f64, delta_p: f64, eta: f64) -> Self {
        Self { t, kappa: erfc_inv(eta) / delta_p }
    }

    pub fn eval(&self, x: f64) -> f64 {
        0.5 * (erf(self.kappa * (x + self.t)) - erf(self.kappa * (x - self.t)))
    }
}

/// Even window vanishing at the origin: `1 − R(x)/R(0)` for a rectangle `R`.
///
/// Evaluated through complementary error functions so that values deep inside
/// the hole are tiny rather than rounding noise.
#[derive(Debug, Clone, Copy)]
pub struct Hole {
    rect: Rectangle,
    norm: f64,
}

impl Hole {
    /// Window rising across `[t − δ′, t + δ′]`.
    pub fn new(t: f64, delta_p: f64, eta: f64) -> Self {
        let rect = Rectangle::new(t, delta_p, eta);
        Self { rect, norm: erf(rect.kappa * t) }
    }

    /// Window rising across `[lo, hi]`.
    pub fn between(lo: f64, hi: f64, eta: f64) -> Self {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo), eta)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, t, a) = (self.rect.kappa, self.rect.t, x.abs());
        let deficit = 0.5 * (erfc(k * (t + a)) + erfc(k * (t - a)) - 2.0 * erfc(k * t));
        (deficit / self.norm).clamp(0.0, 1.0)
    }
}
