//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by gauge construction, fitting and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Not enough data to carry out the requested operation safely.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed input file or record.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
