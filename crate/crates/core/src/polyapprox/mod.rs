//! Certified Chebyshev approximations for polynomial transforms.
//!
//! Every polynomial emitted here lives in the Chebyshev-T basis on `[-1, 1]`,
//! has structural parity where required, and carries grid certificates of its
//! approximation error and sup-norm.

mod chebyshev;
mod poly;
mod targets;
mod window;

pub use chebyshev::{chebyshev_fit_certified, chebyshev_fit_parity, chebyshev_grid, chebyshev_interpolate, FitOptions};
pub use poly::{ApproxReport, BoundedPolynomial, CertKind, Certificate, CoefficientRecord, Parity};
pub use targets::{inverse_poly, localized_poly, log_poly, power_poly, rect_poly, symmetrize_even, PowerSign};
pub use window::{Hole, Rectangle};

/// Degree cap for all searches.
pub const MAX_DEGREE: usize = 4096;
