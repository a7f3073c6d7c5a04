use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum PcsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization failure: pivot {pivot:e} at row {row} is not positive")]
    FactorizationFailure { row: usize, pivot: f64 },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate importance weights: {0}")]
    DegenerateWeights(String),

    #[error("sampler diverged: {0}")]
    Diverged(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, PcsError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PcsError {
    PcsError::InvalidArgument(msg.into())
}
