use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("infeasible solution: {0}")]
    Infeasible(String),
    #[error("solution is not binary at index {index} (value {value})")]
    NotBinary { index: usize, value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("non-finite value in {context} at sample {sample}")]
    NonFinite { context: &'static str, sample: usize },
    #[error("I/O error")]
    Io(#[from] std::io::Error),
    #[error("JSON error")]
    Json(#[from] serde_json::Error),
    #[error("CSV error")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
