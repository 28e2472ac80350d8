use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or grids of the operands do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// The input violates a precondition (non-Hermitian matrix, bad index, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An iterative routine failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
