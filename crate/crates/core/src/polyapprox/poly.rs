use serde::{Deserialize, Serialize};

use super::chebyshev::chebyshev_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    /// `max |P(x) − f(x)|` on the interval.
    Error,
    /// `max |P(x)|` on the interval.
    SupNorm,
    /// `max (|P(x)| − f(|x|))` on the interval.
    Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub kind: CertKind,
    pub interval: (f64, f64),
    pub bound: f64,
    pub max_observed: f64,
    pub grid_points: usize,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.max_observed <= self.bound
    }
}

/// Evidence for a single fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub target_id: String,
    pub interval: (f64, f64),
    pub requested_eps: f64,
    pub achieved_eps: f64,
    pub degree: usize,
    pub grid_points: usize,
}

/// Flat export of a certified coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub target_id: String,
    pub interval: (f64, f64),
    pub degree: usize,
    pub parity: Parity,
    pub scale: f64,
    pub coefficients: Vec<f64>,
    pub achieved_eps: f64,
}

/// Real polynomial in the Chebyshev-T basis with recorded certificates.
///
/// `scale` records a normalization already divided out: the unnormalized
/// approximation is `scale · P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedPolynomial {
    pub cheb_coeffs: Vec<f64>,
    pub parity: Parity,
    pub certified: Vec<Certificate>,
    pub scale: f64,
}

impl BoundedPolynomial {
    /// Builds from coefficients, zeroing the entries forbidden by `parity`
    /// and trimming trailing zeros.
    pub fn new(mut cheb_coeffs: Vec<f64>, parity: Parity) -> Self {
        match parity {
            Parity::Even => cheb_coeffs.iter_mut().skip(1).step_by(2).for_each(|c| *c = 0.0),
            Parity::Odd => cheb_coeffs.iter_mut().step_by(2).for_each(|c| *c = 0.0),
            Parity::None => {}
        }
        while cheb_coeffs.len() > 1 && cheb_coeffs.last() == Some(&0.0) {
            cheb_coeffs.pop();
        }
        if cheb_coeffs.is_empty() {
            cheb_coeffs.push(0.0);
        }
        Self { cheb_coeffs, parity, certified: Vec::new(), scale: 1.0 }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0], Parity::Even)
    }

    /// `p(x) = x`.
    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0], Parity::Odd)
    }

    /// `p(x) = x^k`, exact up to rounding of the basis change.
    pub fn monomial(k: usize) -> Self {
        let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
        // x^k = 2^{1-k} Σ_j binom(k, j) T_{k-2j}(x), with the T_0 term halved.
        let mut c = vec![0.0; k + 1];
        let scale = 0.5f64.powi(k as i32 - 1);
        let mut binom = 1.0f64;
        for j in 0..=k / 2 {
            let idx = k - 2 * j;
            let w = if idx == 0 { 0.5 } else { 1.0 };
            c[idx] += scale * binom * w;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        if k == 0 {
            c[0] = 1.0;
        }
        Self::new(c, parity)
    }

    pub fn degree(&self) -> usize {
        self.cheb_coeffs.len() - 1
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_certificate(mut self, cert: Certificate) -> Self {
        self.certified.push(cert);
        self
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.cheb_coeffs;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + c[0]
    }

    /// `Σ |c_k|`, a rigorous bound on `max_{[-1,1]} |P|`.
    pub fn coefficient_bound(&self) -> f64 {
        self.cheb_coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Grid sup-norm on `[lo, hi]` with `points` Chebyshev-distributed nodes.
    pub fn grid_sup(&self, lo: f64, hi: f64, points: usize) -> f64 {
        chebyshev_grid(lo, hi, points).into_iter().map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }

    /// Max of `|P(x) − f(x)|` over a grid.
    pub fn grid_error(&self, f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
        chebyshev_grid(lo, hi, points).into_iter().map(|x| (self.eval(x) - f(x)).abs()).fold(0.0, f64::max)
    }

    /// Default grid size for certificates at this degree.
    pub fn certificate_points(&self) -> usize {
        (32 * (self.degree() + 1)).max(2048)
    }

    /// Records an error certificate for `f` on `[lo, hi]`.
    pub fn certify_error(self, f: impl Fn(f64) -> f64, lo: f64, hi: f64, bound: f64) -> Self {
        self.certify_labeled("error", f, lo, hi, bound)
    }

    pub fn certify_labeled(mut self, label: &str, f: impl Fn(f64) -> f64, lo: f64, hi: f64, bound: f64) -> Self {
        let points = self.certificate_points();
        let max_observed = self.grid_error(f, lo, hi, points);
        self.certified.push(Certificate {
            label: label.into(),
            kind: CertKind::Error,
            interval: (lo, hi),
            bound,
            max_observed,
            grid_points: points,
        });
        self
    }

    /// Records `max (|P(x)| − f(|x|)) ≤ bound` on `[lo, hi]`.
    pub fn certify_envelope(mut self, f: impl Fn(f64) -> f64, lo: f64, hi: f64, bound: f64) -> Self {
        let points = self.certificate_points();
        let max_observed = chebyshev_grid(lo, hi, points)
            .into_iter()
            .map(|x| self.eval(x).abs() - f(x.abs()))
            .fold(f64::NEG_INFINITY, f64::max);
        self.certified.push(Certificate {
            label: "envelope".into(),
            kind: CertKind::Envelope,
            interval: (lo, hi),
            bound,
            max_observed,
            grid_points: points,
        });
        self
    }

    /// Records a sup-norm certificate on `[lo, hi]`; the coefficient bound is
    /// used instead of the grid whenever it already suffices.
    pub fn certify_sup(mut self, lo: f64, hi: f64, bound: f64) -> Self {
        let points = self.certificate_points();
        let rigorous = self.coefficient_bound();
        let max_observed = if rigorous <= bound { rigorous } else { self.grid_sup(lo, hi, points) };
        self.certified.push(Certificate {
            label: "sup".into(),
            kind: CertKind::SupNorm,
            interval: (lo, hi),
            bound,
            max_observed,
            grid_points: points,
        });
        self
    }

    pub fn all_certificates_hold(&self) -> bool {
        self.certified.iter().all(Certificate::holds)
    }

    /// Sup-norm certificate on `[-1, 1]`, if recorded.
    pub fn sup_norm_certificate(&self) -> Option<&Certificate> {
        self.certified.iter().find(|c| c.kind == CertKind::SupNorm && c.interval.0 <= -1.0 && c.interval.1 >= 1.0)
    }

    pub fn export(&self, target_id: &str) -> CoefficientRecord {
        let err = self.certified.iter().find(|c| c.label == "error");
        CoefficientRecord {
            target_id: target_id.to_string(),
            interval: err.map_or((-1.0, 1.0), |c| c.interval),
            degree: self.degree(),
            parity: self.parity,
            scale: self.scale,
            coefficients: self.cheb_coeffs.clone(),
            achieved_eps: err.map_or(0.0, |c| c.max_observed),
        }
    }
}
