use std::path::PathBuf;

use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix is not positive semi-definite, singular, or malformed.
    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit failed: {0}")]
    Fit(String),

    /// A non-finite value appeared during a computation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed input data (CSV cells, ragged rows, non-finite entries).
    #[error("input error: {0}")]
    Input(String),

    /// A persisted file does not follow its declared format.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
