//! Error taxonomy shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoxError {
    /// Caller violated a precondition (bad shape, degenerate range, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A file did not match its declared on-disk format.
    #[error("format error: {0}")]
    Format(String),
    /// A computation produced or received non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A metric is undefined for the given inputs (e.g. single-class labels).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VoxError>;

impl VoxError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        VoxError::InvalidArgument(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        VoxError::Format(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        VoxError::Numeric(msg.into())
    }
}
