//! Block-encodings: construction, verification, and controlled forms.
//!
//! A block-encoding of `A` is a unitary `U` on `a` ancilla qubits and `s`
//! system qubits with `‖A − β (⟨0|_a ⊗ I) U (|0⟩_a ⊗ I)‖ ≤ ε`. Ancillas are
//! the most significant register throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{svd, unitary_with_first_column, ComplexMatrix, RngStream};

/// Unitarity tolerance accepted by constructors.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockEncoding {
    pub unitary: ComplexMatrix,
    pub beta: f64,
    pub ancillas: u32,
    pub eps: f64,
    pub system_qubits: u32,
}

/// `log2(n)` when `n` is a power of two.
pub fn qubits_for(n: usize) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::InvalidDimension(format!("{n} is not a power of two")))
    }
}

impl BlockEncoding {
    pub fn new(unitary: ComplexMatrix, beta: f64, ancillas: u32, eps: f64) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::InvalidDimension("block-encoding unitary must be square".into()));
        }
        let total = qubits_for(unitary.rows())?;
        if ancillas > total {
            return Err(Error::InvalidDimension(format!("{ancillas} ancillas exceed {total} qubits")));
        }
        if !(beta > 0.0 && beta.is_finite()) || !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta}, eps = {eps}")));
        }
        let defect = unitary.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::ContractViolation(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(Self { unitary, beta, ancillas, eps, system_qubits: total - ancillas })
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_qubits
    }

    /// The effective block `Ã`.
    pub fn block(&self) -> ComplexMatrix {
        top_left_block(self)
    }
}

/// `Ã = (⟨0|_a ⊗ I_s) U (|0⟩_a ⊗ I_s)`.
pub fn top_left_block(be: &BlockEncoding) -> ComplexMatrix {
    let d = be.system_dim();
    be.unitary.submatrix(0, 0, d, d)
}

/// Spectral residual `‖target − β Ã‖` and whether it is within `ε + 1e-10`.
pub fn verify(be: &BlockEncoding, target: &ComplexMatrix) -> Result<(bool, f64)> {
    let d = be.system_dim();
    if target.rows() != d || target.cols() != d {
        return Err(Error::InvalidDimension(format!(
            "target is {}x{}, encoding acts on dimension {d}",
            target.rows(),
            target.cols()
        )));
    }
    let residual = (target - &top_left_block(be).scale(be.beta)).spectral_norm();
    Ok((residual <= be.eps + 1e-10, residual))
}

fn dilation_unitary(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    // Shared singular vectors keep the off-diagonal square roots consistent
    // when singular values sit at 1.
    let dec = svd(x)?;
    let comp: Vec<f64> = dec.singular_values.iter().map(|s| (1.0 - s.min(1.0).powi(2)).sqrt()).collect();
    let (u, v) = (&dec.left, &dec.right);
    let left = &(u * &ComplexMatrix::from_diagonal_real(&comp)) * &u.adjoint();
    let right = &(v * &ComplexMatrix::from_diagonal_real(&comp)) * &v.adjoint();
    ComplexMatrix::block2(x, &left, &right, &(-&x.adjoint()))
}

/// Exact one-ancilla `(β, 1, 0)` dilation
/// `[[A/β, √(I − XX†)], [√(I − X†X), −X†]]`.
pub fn dilate(a: &ComplexMatrix, beta: f64) -> Result<BlockEncoding> {
    if !a.is_square() {
        return Err(Error::InvalidDimension("dilate requires a square matrix".into()));
    }
    qubits_for(a.rows())?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    let x = a.scale(1.0 / beta);
    let norm = x.spectral_norm();
    if norm > 1.0 + 1e-12 {
        return Err(Error::ScaleViolation { norm });
    }
    BlockEncoding::new(dilation_unitary(&x)?, beta, 1, 0.0)
}

/// Entry-access encoding with `β = 2^s`, valid whenever every entry has modulus ≤ 1.
pub fn from_entry_access(a: &ComplexMatrix) -> Result<BlockEncoding> {
    if a.max_abs() > 1.0 {
        return Err(Error::Precondition("entry-access encoding needs |a_ij| <= 1".into()));
    }
    dilate(a, a.rows() as f64)
}

/// Approximate encoding: the exact dilation with a random perturbation of
/// spectral norm `inject` in its off-diagonal blocks, re-unitarized by QR.
/// The achieved `‖β Ã − A‖` is stored in `eps`.
pub fn dilate_perturbed(a: &ComplexMatrix, beta: f64, inject: f64, stream: &RngStream) -> Result<BlockEncoding> {
    let exact = dilate(a, beta)?;
    let d = a.rows();
    let mut rng = stream.rng();
    let noise = crate::numkit::ginibre(2 * d, &mut rng);
    let zero = ComplexMatrix::zeros(d, d);
    let off = ComplexMatrix::block2(&zero, &noise.submatrix(0, d, d, d), &noise.submatrix(d, 0, d, d), &zero)?;
    let n = off.spectral_norm();
    let off = if n > 0.0 { off.scale(inject / n) } else { off };
    let qr = (&exact.unitary + &off).into_nalgebra().qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..2 * d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    let unitary: ComplexMatrix = q.into();
    let achieved = (&unitary.submatrix(0, 0, d, d).scale(beta) - a).spectral_norm();
    BlockEncoding::new(unitary, beta, 1, achieved)
}

/// Density matrix and exact block-encoding from a purification `|ψ⟩` on
/// `ancillas + s` qubits (ancilla register most significant).
///
/// The encoding is `(G† ⊗ I)(I ⊗ SWAP)(G ⊗ I)` with `G|0⟩ = |ψ⟩`; it uses
/// `ancillas + s` ancilla qubits.
pub fn from_purification(psi: &[Complex64], ancillas: u32) -> Result<(ComplexMatrix, BlockEncoding)> {
    let total = qubits_for(psi.len())?;
    if ancillas > total {
        return Err(Error::InvalidDimension(format!("{ancillas} ancillas exceed {total} qubits")));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("purification has norm {norm}")));
    }
    let s = total - ancillas;
    let (da, ds) = (1usize << ancillas, 1usize << s);
    let rho = ComplexMatrix::from_fn(ds, ds, |j, k| (0..da).map(|i| psi[i * ds + j] * psi[i * ds + k].conj()).sum());

    let g = unitary_with_first_column(psi);
    let id_s = ComplexMatrix::identity(ds);
    let swap = ComplexMatrix::from_fn(ds * ds, ds * ds, |r, c| {
        let (j, k) = (c / ds, c % ds);
        if r == k * ds + j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let middle = ComplexMatrix::identity(da).kron(&swap);
    let u = &(&g.adjoint().kron(&id_s) * &middle) * &g.kron(&id_s);
    let be = BlockEncoding::new(u, 1.0, ancillas + s, 0.0)?;
    Ok((rho, be))
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`, control most significant.
pub fn controlled(be: &BlockEncoding) -> ComplexMatrix {
    let n = be.unitary.rows();
    let id = ComplexMatrix::identity(n);
    let zero = ComplexMatrix::zeros(n, n);
    ComplexMatrix::block2(&id, &zero, &zero, &be.unitary).expect("square blocks of equal size")
}
