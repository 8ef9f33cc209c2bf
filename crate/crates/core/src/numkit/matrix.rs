use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which operator norm [`ComplexMatrix::norm`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Largest singular value.
    Spectral,
    /// Sum of singular values.
    Trace,
}

/// Dense complex matrix. Values are immutable in spirit: operations return
/// fresh matrices.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!("{rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if let Some(i) = rows.iter().position(|row| row.len() != c) {
            return Err(Error::InvalidInput(format!("ragged row {i}")));
        }
        let entries = rows.iter().flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        Self::from_row_major(r, c, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn from_diagonal_real(diag: &[f64]) -> Self {
        let d = diag.len();
        Self::from_fn(d, d, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let d = diag.len();
        Self::from_fn(d, d, |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
    }

    /// Column vector from entries.
    pub fn column(entries: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Rank-one `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.cols(), other.rows());
        debug_assert_eq!(self.rows(), other.cols());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Copies the `rows × cols` block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols() {
            return Err(Error::InvalidDimension("incompatible 2x2 block layout".into()));
        }
        let (r1, c1) = (a.rows(), a.cols());
        let mut out = DMatrix::zeros(r1 + c.rows(), c1 + b.cols());
        out.view_mut((0, 0), a.0.shape()).copy_from(&a.0);
        out.view_mut((0, c1), b.0.shape()).copy_from(&b.0);
        out.view_mut((r1, 0), c.0.shape()).copy_from(&c.0);
        out.view_mut((r1, c1), d.0.shape()).copy_from(&d.0);
        Ok(Self(out))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum()).collect()
    }

    /// `⟨v|self|v⟩`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        let n = self.rows();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate().take(n) {
            let row: Complex64 = v.iter().enumerate().map(|(j, vj)| self.0[(i, j)] * vj).sum();
            acc += vi.conj() * row;
        }
        acc
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `(M − M†)/(2i)`.
    pub fn antihermitian_part(&self) -> Self {
        Self((&self.0 - self.0.adjoint()) * Complex64::new(0.0, -0.5))
    }

    /// Spectral or trace norm via singular values.
    pub fn norm(&self, kind: NormKind) -> f64 {
        let sv = self.singular_values();
        match kind {
            NormKind::Spectral => sv.first().copied().unwrap_or(0.0),
            NormKind::Trace => sv.iter().sum(),
        }
    }

    pub fn spectral_norm(&self) -> f64 {
        self.norm(NormKind::Spectral)
    }

    /// Singular values, non-increasing.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.0.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// `‖M†M − I‖` in the spectral norm.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        (&self.adjoint() * self).sub_identity(n).spectral_norm()
    }

    fn sub_identity(mut self, n: usize) -> Self {
        for i in 0..n {
            self.0[(i, i)] -= Complex64::new(1.0, 0.0);
        }
        self
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }
}

impl From<DMatrix<Complex64>> for ComplexMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, " ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire { rows: self.rows(), cols: self.cols(), data: self.to_row_major().iter().map(|z| [z.re, z.im]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let entries = w.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::from_row_major(w.rows, w.cols, entries).map_err(serde::de::Error::custom)
    }
}
