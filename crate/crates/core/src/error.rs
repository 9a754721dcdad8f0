use thiserror::Error;

/// Errors raised by the propagation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("layer {layer}: {message}")]
    Layer { layer: usize, message: String },
    #[error("matrix is not positive definite after jitter")]
    NotPositiveDefinite,
    #[error("samples must be sorted ascending")]
    Unsorted,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed network document: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NotPositiveDefinite)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
