use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum WaveError {
    /// An argument lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),
    /// A factorization, solve or eigen-decomposition failed.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A result violates a structural guarantee (complex frequencies, energy growth, ...).
    #[error("integrity error: {0}")]
    Integrity(String),
    /// A time series does not contain a single clean oscillation.
    #[error("ambiguous signal: {0}")]
    AmbiguousSignal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WaveError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(WaveError::Domain(msg.into()))
}
