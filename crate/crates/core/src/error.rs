use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// The objective is not differentiable at the requested point.
    #[error("objective is not differentiable: sample {sample} has zero inner product with the point")]
    NonDifferentiable { sample: usize },

    #[error("run diverged at iteration {iter}: {reason}")]
    Diverged { iter: usize, reason: String },

    #[error("infeasible budget: {0}")]
    InfeasibleBudget(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            actual: format!("{}x{}", actual.0, actual.1),
        }
    }
}
