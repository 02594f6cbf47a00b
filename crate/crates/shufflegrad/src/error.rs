//! Crate-wide error type.
//!
//! One enum covers every failure class the library reports. The CLI maps
//! variants onto exit codes (see `cli`): configuration and usage problems,
//! I/O and parse failures, and runtime divergence are kept distinct so
//! callers can react without string-matching messages.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix dimension did not match its peer.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An index was outside the valid range for its container.
    #[error("index {index} out of range (valid: 0..{bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    /// A numeric input contained NaN or an infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// A configuration value was rejected.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The requested combination of options is not supported.
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    /// A caller-side precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Text input could not be parsed; carries the 1-based line number.
    #[error("parse error at {origin} line {line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    /// An iterate left the finite range during optimization.
    #[error("divergence at epoch {epoch}, inner step {step}: iterate is no longer finite")]
    Divergence { epoch: usize, step: usize },

    /// An I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attaches a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
