use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use super::{ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// `M = left · diag(singular_values) · right†`, singular values non-increasing.
#[derive(Debug, Clone)]
pub struct SVDFactorization {
    pub left: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl SVDFactorization {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let u = self.left.as_nalgebra();
        let v = self.right.as_nalgebra();
        DMatrix::from_fn(u.nrows(), v.nrows(), |i, j| {
            (0..k).map(|t| u[(i, t)] * self.singular_values[t] * v[(j, t)].conj()).sum()
        })
        .into()
    }
}

/// Full singular value decomposition of a square or rectangular matrix.
pub fn svd(m: &ComplexMatrix) -> Result<SVDFactorization> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (r, c) = (m.rows(), m.cols());
    // Factor the tall orientation so both unitaries come out square.
    if r < c {
        let t = svd(&m.adjoint())?;
        return Ok(SVDFactorization { left: t.right, singular_values: t.singular_values, right: t.left });
    }
    let dec = SVD::new(m.as_nalgebra().clone(), true, true);
    let (Some(u), Some(v_t)) = (dec.u, dec.v_t) else {
        return Err(Error::InternalConsistency("SVD did not return singular vectors".into()));
    };
    let sv = dec.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    // Thin factors are r×c and c×c; complete U to an r×r unitary when tall.
    let mut left = DMatrix::<Complex64>::zeros(r, r);
    for (new, &old) in order.iter().enumerate() {
        left.set_column(new, &u.column(old));
    }
    if r > c {
        complete_basis(&mut left, c);
    }
    let right = DMatrix::from_fn(c, c, |i, j| v_t[(order[j], i)].conj());
    Ok(SVDFactorization {
        left: left.into(),
        singular_values: order.iter().map(|&k| sv[k].max(0.0)).collect(),
        right: right.into(),
    })
}

/// Unitary whose first column is the unit vector `v`.
pub fn unitary_with_first_column(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    let mut q = DMatrix::<Complex64>::zeros(n, n);
    q.set_column(0, &nalgebra::DVector::from_column_slice(v));
    complete_basis(&mut q, 1);
    q.into()
}

/// Principal square root of a PSD matrix, eigenvalues clipped at zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(m)?.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Fills columns `filled..` of `q` with an orthonormal complement.
fn complete_basis(q: &mut DMatrix<Complex64>, filled: usize) {
    let n = q.nrows();
    let mut next = filled;
    for e in 0..n {
        if next == n {
            break;
        }
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        v[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for k in 0..next {
                let col = q.column(k);
                let proj = col.dotc(&v);
                v -= col * proj;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            q.set_column(next, &(v / Complex64::new(nv, 0.0)));
            next += 1;
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues non-increasing.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = self.eigenvectors.as_nalgebra();
        let fl: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let n = v.nrows();
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()).into()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::ContractViolation(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    let dec = SymmetricEigen::new(m.hermitian_part().into_nalgebra());
    let vals = dec.eigenvalues;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let n = vals.len();
    let vecs = DMatrix::from_fn(n, n, |i, j| dec.eigenvectors[(i, order[j])]);
    Ok(HermitianEig { eigenvalues: order.iter().map(|&k| vals[k]).collect(), eigenvectors: vecs.into() })
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
pub fn matrix_function_hermitian(m: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(m)?.map(f))
}
