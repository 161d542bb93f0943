use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} systems, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("incomplete moments: no moment recorded for collection [{0}]")]
    IncompleteMoments(String),

    #[error("inconsistent moments: {0}")]
    Inconsistent(String),

    #[error("no-signaling violated on systems {systems:?}: marginal deviates by {deviation:.3e}")]
    NoSignaling { systems: Vec<usize>, deviation: f64 },

    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
