//! Shared error type for the whole library.

use thiserror::Error;

/// Errors surfaced by any fdesq operation.
#[derive(Debug, Error)]
pub enum Error {
    /// Vector/matrix shapes do not agree.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A parameter is outside its allowed range (non-positive sharpness,
    /// pool factor that does not divide the window, bad schedule index, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A computed quantity is NaN or infinite where a finite value is required.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Caller-supplied data violates an operation's precondition
    /// (empty sample set, series too short, fewer than two tickers, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Underlying file-system failure, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file's contents could not be decoded.
    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    /// Well-formed but invalid data (duplicate dates, non-positive closes).
    #[error("data error in {path}: {message}")]
    Data { path: String, message: String },

    /// A series is constant, so a min-max scaler cannot be fit.
    #[error("degenerate range: series is constant at {value}")]
    DegenerateRange { value: f64 },

    /// A slice index or window does not fit inside the series.
    #[error("range error: {0}")]
    Range(String),

    /// Statistical input with no variation (constant series for correlation).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
