use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::{Exp1, StandardNormal};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Reproducible substream identified by a seed and a label path.
///
/// The generator for a path depends only on `(seed, path)`, never on the order
/// in which sibling substreams are consumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub path: Vec<u64>,
}

const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: Vec::new() }
    }

    pub fn child(&self, label: u64) -> Self {
        let mut path = self.path.clone();
        path.push(label);
        Self { seed: self.seed, path }
    }

    pub fn descend(&self, labels: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(labels);
        Self { seed: self.seed, path }
    }

    /// Key of this substream.
    pub fn key(&self) -> u64 {
        let mut h = mix64(self.seed ^ 0x6a09_e667_f3bc_c908);
        for (depth, &label) in self.path.iter().enumerate() {
            h = mix64(h ^ mix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15 ^ depth as u64)));
        }
        h
    }

    pub fn rng(&self) -> SplitMix64 {
        SplitMix64::seed_from_u64(self.key())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `d × d` complex Ginibre matrix, drawn column by column.
pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut entries = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        entries.push(complex_normal(rng));
    }
    DMatrix::from_column_slice(d, d, &entries).into()
}

/// Haar-random unitary: QR of a Ginibre matrix with `R`'s diagonal phases removed.
pub fn haar_unitary(d: usize, stream: &RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("haar_unitary requires d >= 1".into()));
    }
    let g = ginibre(d, &mut stream.rng()).into_nalgebra();
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Ok(q.into())
}

/// `U|0⟩` for the Haar unitary of the same stream, without the factorization.
///
/// Agrees with the first column of [`haar_unitary`] up to rounding.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R, out: &mut Vec<Complex64>) {
    out.clear();
    let mut norm2 = 0.0;
    for _ in 0..d {
        let z = complex_normal(rng);
        norm2 += z.norm_sqr();
        out.push(z);
    }
    let inv = 1.0 / norm2.sqrt();
    for z in out.iter_mut() {
        *z *= inv;
    }
}

/// Random density matrix with `rank` nonzero eigenvalues, each at least `lambda_min`.
pub fn random_density_matrix(d: usize, rank: usize, lambda_min: f64, stream: &RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be >= 1".into()));
    }
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!("rank {rank} outside 1..={d}")));
    }
    if !(lambda_min >= 0.0) || lambda_min * rank as f64 > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("lambda_min {lambda_min} infeasible for rank {rank}")));
    }
    let mut rng = stream.child(0).rng();
    let w: Vec<f64> = (0..rank).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    let free = (1.0 - lambda_min * rank as f64).max(0.0);
    let mut spectrum = vec![0.0; d];
    for (k, wk) in w.iter().enumerate() {
        spectrum[k] = lambda_min + free * wk / total;
    }
    let u = haar_unitary(d, &stream.child(1))?;
    let rho = &(&u * &ComplexMatrix::from_diagonal_real(&spectrum)) * &u.adjoint();
    Ok(rho.hermitian_part())
}

/// Random Hermitian matrix rescaled to the given spectral norm.
pub fn random_hermitian(d: usize, spectral_norm: f64, stream: &RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be >= 1".into()));
    }
    let g = ginibre(d, &mut stream.rng());
    let h = g.hermitian_part();
    let n = h.spectral_norm();
    Ok(if n > 0.0 { h.scale(spectral_norm / n) } else { h })
}

/// Random (generally non-normal) matrix rescaled to the given spectral norm.
pub fn random_contraction(d: usize, spectral_norm: f64, stream: &RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be >= 1".into()));
    }
    let g = ginibre(d, &mut stream.rng());
    let n = g.spectral_norm();
    Ok(if n > 0.0 { g.scale(spectral_norm / n) } else { g })
}
