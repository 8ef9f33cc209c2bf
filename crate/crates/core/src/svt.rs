//! Polynomial singular-value and eigenvalue transforms, and the Hadamard-test
//! outcome distribution they induce.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{hermitian_eig, svd, ComplexMatrix};
use crate::polyapprox::{BoundedPolynomial, Parity};

/// `P(Ã)` with its Hermitian and anti-Hermitian parts, `P = A^Re + i A^Im`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformedBlock {
    pub value: ComplexMatrix,
    pub hermitian_part: ComplexMatrix,
    pub antihermitian_part: ComplexMatrix,
    pub source_poly_degree: usize,
}

impl TransformedBlock {
    pub fn from_matrix(value: ComplexMatrix, source_poly_degree: usize) -> Self {
        Self {
            hermitian_part: value.hermitian_part(),
            antihermitian_part: value.antihermitian_part(),
            value,
            source_poly_degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.value.rows()
    }
}

/// Which Hadamard-test variant is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    /// Plain test, bias `⟨A^Re⟩`.
    Re,
    /// S-gate variant, bias `−⟨A^Im⟩`.
    Im,
}

impl Part {
    pub const BOTH: [Part; 2] = [Part::Re, Part::Im];

    pub fn phase_flag(self) -> u8 {
        match self {
            Part::Re => 0,
            Part::Im => 1,
        }
    }
}

const NORM_SLACK: f64 = 1e-10;

/// Singular-value transform: odd `p` gives `Σ p(ζ)|τ̃⟩⟨τ|`, even `p` gives
/// `Σ p(ζ)|τ⟩⟨τ|` in the right singular basis.
pub fn apply_poly_sv(block: &ComplexMatrix, p: &BoundedPolynomial) -> Result<TransformedBlock> {
    let dec = svd(block)?;
    let top = dec.singular_values.first().copied().unwrap_or(0.0);
    if top > 1.0 + NORM_SLACK {
        return Err(Error::ContractViolation(format!("block norm {top} exceeds 1")));
    }
    let pz: Vec<f64> = dec.singular_values.iter().map(|&z| p.eval(z)).collect();
    let n = block.rows();
    let (left, right) = match p.parity {
        Parity::Odd => (&dec.left, &dec.right),
        Parity::Even => (&dec.right, &dec.right),
        Parity::None => {
            return Err(Error::ContractViolation("polynomial has no definite parity".into()));
        }
    };
    let value = ComplexMatrix::from_fn(n, block.cols(), |i, j| {
        pz.iter().enumerate().map(|(k, &w)| left.get(i, k) * w * right.get(j, k).conj()).sum()
    });
    Ok(TransformedBlock::from_matrix(value, p.degree()))
}

/// Eigenvalue transform of a PSD contraction.
pub fn apply_poly_ev(rho: &ComplexMatrix, p: &BoundedPolynomial) -> Result<TransformedBlock> {
    let eig = hermitian_eig(rho)?;
    let lo = eig.min_eigenvalue();
    if lo < -1e-10 {
        return Err(Error::ContractViolation(format!("matrix is not PSD (min eigenvalue {lo:.3e})")));
    }
    let hi = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if hi > 1.0 + NORM_SLACK {
        return Err(Error::ContractViolation(format!("matrix norm {hi} exceeds 1")));
    }
    let value = eig.map(|l| Complex64::new(p.eval(l), 0.0));
    Ok(TransformedBlock::from_matrix(value, p.degree()))
}

/// Outcome-0 probability from the bias `⟨v|A^Re|v⟩` or `⟨v|A^Im|v⟩`.
pub fn p0_from_bias(bias: f64, part: Part) -> Result<f64> {
    let p0 = match part {
        Part::Re => 0.5 * (1.0 + bias),
        Part::Im => 0.5 * (1.0 - bias),
    };
    if !(-NORM_SLACK..=1.0 + NORM_SLACK).contains(&p0) {
        return Err(Error::InternalConsistency(format!("outcome probability {p0} outside [0, 1]")));
    }
    Ok(p0.clamp(0.0, 1.0))
}

/// `(p0, p1)` of the Hadamard test on `U|0⟩`; `phase_flag = 1` selects the
/// S-gate variant.
pub fn hadamard_outcome_probs(t: &TransformedBlock, u_mat: &ComplexMatrix, phase_flag: u8) -> Result<(f64, f64)> {
    if u_mat.rows() != t.dim() || !u_mat.is_square() {
        return Err(Error::InvalidDimension(format!(
            "unitary is {}x{}, block has dimension {}",
            u_mat.rows(),
            u_mat.cols(),
            t.dim()
        )));
    }
    let v = u_mat.col_vec(0);
    let (part, op) = match phase_flag {
        0 => (Part::Re, &t.hermitian_part),
        1 => (Part::Im, &t.antihermitian_part),
        other => return Err(Error::InvalidParameter(format!("phase flag {other} not in {{0, 1}}"))),
    };
    let p0 = p0_from_bias(op.quadratic_form(&v).re, part)?;
    Ok((p0, 1.0 - p0))
}

/// Simulated query count `⌈(c/δ) ln(1/ε)⌉`, at least 1.
pub fn degree_budget(delta: f64, eps: f64, c: f64) -> usize {
    let raw = c / delta * (1.0 / eps).ln();
    // Absorb rounding so exact integers are not bumped up.
    let n = (raw - 1e-9).ceil();
    if n.is_finite() && n >= 1.0 {
        n as usize
    } else {
        1
    }
}
