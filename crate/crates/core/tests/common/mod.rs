#![allow(dead_code)]

use locc_trace::numkit::{hermitian_eig, ComplexMatrix, RngStream};
use locc_trace::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn stream(seed: u64, label: u64) -> RngStream {
    RngStream::new(seed).child(label)
}

/// Exact `Σ f(λ)|v⟩⟨v|` via eigendecomposition.
pub fn spectral_apply(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    hermitian_eig(m).unwrap().map(|l| c(f(l), 0.0))
}

/// Closed-form relative entropy `Tr ρ(ln ρ − ln σ)`.
pub fn exact_relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let lr = spectral_apply(rho, |x| x.ln());
    let ls = spectral_apply(sigma, |x| x.ln());
    rho.trace_product(&(&lr - &ls)).re
}

/// Closed-form Petz Rényi divergence.
pub fn exact_renyi(rho: &ComplexMatrix, sigma: &ComplexMatrix, alpha: f64) -> f64 {
    let ra = spectral_apply(rho, |x| x.max(0.0).powf(alpha));
    let sa = spectral_apply(sigma, |x| if x > 1e-300 { x.powf(1.0 - alpha) } else { 0.0 });
    ra.trace_product(&sa).re.ln() / (alpha - 1.0)
}

pub fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

use locc_trace::blockenc::dilate;
use locc_trace::numkit::random_contraction;
use locc_trace::polyapprox::BoundedPolynomial;
use locc_trace::protocol::ProtocolConfig;

/// Protocol on dilations of two random contractions.
pub fn random_config(
    d: usize,
    seed: u64,
    f: BoundedPolynomial,
    g: BoundedPolynomial,
    n: usize,
    m: usize,
) -> ProtocolConfig {
    let a = random_contraction(d, 0.95, &stream(seed, 100)).unwrap();
    let b = random_contraction(d, 0.95, &stream(seed, 101)).unwrap();
    ProtocolConfig::new(n, m, seed, f, g, dilate(&a, 1.0).unwrap(), dilate(&b, 1.0).unwrap()).unwrap()
}

/// Sample mean and standard error of the mean, treating re/im jointly.
pub fn mean_and_se(values: &[Complex64]) -> (Complex64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
