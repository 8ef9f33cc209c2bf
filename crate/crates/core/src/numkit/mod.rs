//! Dense complex linear algebra and seeded sampling.

mod decomp;
mod matrix;
mod random;

pub use decomp::{
    hermitian_eig, matrix_function_hermitian, psd_sqrt, svd, unitary_with_first_column, HermitianEig, SVDFactorization,
};
pub use matrix::{ComplexMatrix, NormKind};
pub use random::{
    ginibre, haar_state, haar_unitary, random_contraction, random_density_matrix, random_hermitian, RngStream,
};

/// Absolute tolerance for Hermiticity checks on inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;
