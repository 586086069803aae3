use thiserror::Error;

/// Errors raised by the numerical kernels and the norm computations built on them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{algorithm} did not converge after {iterations} iterations ({diagnostic})")]
    NoConvergence {
        algorithm: &'static str,
        iterations: usize,
        diagnostic: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
