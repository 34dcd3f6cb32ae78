//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by spec construction, numerical routines, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A noise or volatility specification violates one of its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Matrix dimensions do not conform.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix that must be positive definite is not.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A matrix that must be symmetric is not.
    #[error("matrix not symmetric: {0}")]
    NotSymmetric(String),

    /// A numeric argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A moment needed in closed form is only available by Monte Carlo.
    #[error("moment unavailable in closed form: {0}")]
    MomentUnavailable(String),

    /// A numerical routine failed its own consistency check.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Experiment configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Config file syntax error.
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    /// Records CSV could not be parsed.
    #[error("records parse error at line {line}: {message}")]
    RecordsParse { line: usize, message: String },

    /// An I/O failure, tagged with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
