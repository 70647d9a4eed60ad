//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Evaluation outside the domain of an atom, e.g. log of a non-positive
    /// argument.
    #[error("domain error: {0}")]
    Domain(String),

    /// A nonlinear body falls outside the class the cut machinery can
    /// estimate (convex, concave univariate, bilinear products, and sums
    /// thereof). Raised at load time, never mid-solve.
    #[error("unsupported expression: {0}")]
    Unsupported(String),

    /// Instance file could not be parsed.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// An operation was called outside its contract.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The LP relaxation is unbounded; the instance is missing finite bounds.
    #[error("unbounded relaxation: {0}")]
    Unbounded(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
