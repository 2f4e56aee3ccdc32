use thiserror::Error;

/// Errors raised by the discretization and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polynomial order {0}: must be at least 1")]
    InvalidOrder(usize),

    #[error("unsupported order {0}: multigrid hierarchies need a power of two >= 2")]
    UnsupportedOrder(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("overlap {overlap} exceeds polynomial order {order}")]
    InvalidOverlap { overlap: usize, order: usize },

    #[error("shape mismatch: expected {expected} coefficients, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("fast diagonalization failed for subdomain {subdomain}: {reason}")]
    Factorization { subdomain: usize, reason: String },

    #[error("coarse solve did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    CoarseSolve { iterations: usize, residual: f64 },

    #[error("solver breakdown at iteration {iteration}: p'Ap = {curvature:.3e}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("solver diverged at iteration {iteration} (non-finite residual)")]
    Divergence { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
