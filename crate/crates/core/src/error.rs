use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a function (e.g. `log_gamma(-1.0)`).
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("{what}: {value} outside [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("{what}: need at least {needed} samples, got {got}")]
    TooFewSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{0}: degenerate input")]
    Degenerate(&'static str),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("trace contains no draws")]
    EmptyTrace,

    #[error("no draws with K = {0}")]
    NoMatchingDraws(usize),

    #[error("item count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("reports cover different edge sets")]
    EdgeSetMismatch,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("malformed trace file: {0}")]
    TraceFormat(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Reclassify as a configuration problem, keeping configuration errors as they are.
    pub fn into_config(self) -> Self {
        match self {
            e @ (Error::InvalidConfig(_) | Error::Range { .. }) => e,
            e => Error::InvalidConfig(e.to_string()),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Range { .. } => 2,
            Error::InvalidData(_)
            | Error::Parse { .. }
            | Error::Csv(_)
            | Error::TraceFormat(_)
            | Error::SizeMismatch(..)
            | Error::EdgeSetMismatch
            | Error::NoMatchingDraws(_)
            | Error::EmptyTrace => 3,
            Error::Domain { .. }
            | Error::TooFewSamples { .. }
            | Error::Degenerate(_)
            | Error::Numeric(_) => 4,
            Error::File { .. } | Error::Io(_) | Error::Json(_) => 3,
        }
    }
}
