//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor or operation received structurally invalid input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical procedure failed to produce a usable result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A scenario file failed to parse.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// Filesystem trouble while reading configs or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
