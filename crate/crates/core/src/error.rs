use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Precondition,
    Approximation,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("scale violation: ||A/beta|| = {norm:.6e} exceeds 1")]
    ScaleViolation { norm: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("approximation failure for {target}: best error {best_error:.3e} at degree {degree} (requested {requested:.3e})")]
    ApproximationFailure { target: String, best_error: f64, degree: usize, requested: f64 },
    #[error("unreliable logarithm: trace estimate {estimate:.6e} below floor {floor:.6e}")]
    UnreliableLog { estimate: f64, floor: f64 },
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidDimension(_) | Error::InvalidInput(_) | Error::InvalidParameter(_) => ErrorKind::Input,
            Error::ContractViolation(_) | Error::ScaleViolation { .. } | Error::Precondition(_) => {
                ErrorKind::Precondition
            }
            Error::ApproximationFailure { .. } | Error::UnreliableLog { .. } => ErrorKind::Approximation,
            Error::InternalConsistency(_) => ErrorKind::Internal,
        }
    }
}
