use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad caller input: mismatched dimensions, fields, counts or out-of-range parameters.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input outside the domain of an operation (e.g. an operator that is not rank-one PSD).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed input file.
    #[error("parse error at line {line}, column {column}, field `{path}`: {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },

    /// Well-formed input that violates a structural invariant.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
