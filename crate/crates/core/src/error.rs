use thiserror::Error;

/// Errors raised across the library. Numerical failures carry enough context
/// (pivot index, offending location pair) to diagnose bad parameters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("minimax iteration did not converge after {iterations} iterations (deviation {deviation:.3e})")]
    NoConvergence { iterations: usize, deviation: f64 },

    #[error("degenerate rational approximant: {0}")]
    Degenerate(String),

    #[error("root finding failed: {0}")]
    Roots(String),

    #[error("partial-fraction sign violation: {0}")]
    SignViolation(String),

    #[error("denominator vanishes at x = {0}")]
    PoleProximity(f64),

    #[error("special function out of range: {0}")]
    Range(String),

    #[error("derivative of order {order} does not exist at lag 0 for smoothness index {j}")]
    NotSmooth { order: usize, j: usize },

    #[error("odd derivative of order {order} failed to cancel at lag 0 (residual {residual:.3e})")]
    Cancellation { order: usize, residual: f64 },

    #[error("locations {0} and {1} are duplicated or closer than the minimum spacing")]
    DuplicateLocations(usize, usize),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("quadrature did not reach tolerance (estimated error {0:.3e})")]
    Quadrature(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
