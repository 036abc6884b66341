use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the authentication pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: String, actual: String },

    #[error("model configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate channel: p_b == q_b == {0}")]
    DegenerateChannel(f64),

    #[error("ordering error: requires p_b <= q_b, got p_b = {p_b}, q_b = {q_b}")]
    Ordering { p_b: f64, q_b: f64 },

    #[error("invalid invariant: {0}")]
    Invariant(String),

    #[error("{0}")]
    Plan(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
