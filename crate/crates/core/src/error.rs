use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("singular point at x = {x}: {reason}")]
    SingularPoint { x: f64, reason: String },

    #[error("parity mismatch: {0}")]
    Parity(String),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("grid is not symmetric about 0")]
    GridAsymmetric,

    #[error("division by a near-zero value at x = {x} (|p| = {value:e})")]
    NearZeroDivision { x: f64, value: f64 },

    #[error("polynomial degree {degree} exceeds the admissible bound {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("invalid operator family: {0}")]
    BadFamily(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn singular(x: f64, reason: impl Into<String>) -> Self {
        Error::SingularPoint {
            x,
            reason: reason.into(),
        }
    }
}
