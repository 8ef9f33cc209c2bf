//! Desk-scale simulation of a two-party LOCC protocol estimating `Tr(f(A) g(B))`.
//!
//! Each party holds a block-encoded matrix, applies a bounded parity-definite
//! polynomial to its effective block, and runs Hadamard tests against shared
//! and local Haar-random states. Only measurement bits cross the party
//! boundary; a classical combiner turns them into an unbiased estimate.
//!
//! Modules, bottom-up:
//!
//! - [`numkit`]: dense complex matrices, factorizations, seeded randomness.
//! - [`polyapprox`]: certified Chebyshev approximations of the target functions.
//! - [`blockenc`]: block-encodings, dilations, purified access.
//! - [`svt`]: singular/eigen-value polynomial transforms and Hadamard statistics.
//! - [`protocol`]: sampling, the trace estimator, and its exact oracles.
//! - [`apps`]: divergences, linear solving, and Hamiltonian simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod apps;
pub mod blockenc;
pub mod error;
pub mod numkit;
pub mod parallel;
pub mod polyapprox;
pub mod protocol;
pub mod svt;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;
