use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad classification used by the command line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("series already in W/m2; refusing to convert twice")]
    AlreadyConverted,

    #[error("shift by {steps} steps leaves nothing of a series with {len} samples")]
    ShiftTooLarge { steps: i64, len: usize },

    #[error("timestamps not strictly increasing at position {position}")]
    NotIncreasing { position: usize },

    #[error("invalid sample at position {position}: {reason}")]
    InvalidSample { position: usize, reason: String },

    #[error("empty intersection: ground spans {ground}, satellite spans {satellite}")]
    EmptyJoin { ground: String, satellite: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Format(String),

    #[error("invalid station metadata: {0}")]
    Metadata(String),

    #[error("cannot fit empty month")]
    EmptyMonth,

    #[error("month too small to split: {n} rows (need at least 5)")]
    SplitTooSmall { n: usize },

    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),

    #[error("underdetermined system: {rows} rows < {cols} columns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("undefined R\u{b2} (zero total variance)")]
    UndefinedR2,

    #[error("{0} needs at least one value")]
    EmptyInput(&'static str),

    #[error("latitude {0} is polar; day length formula needs |latitude| < 66.5")]
    PolarLatitude(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::InvalidRatio(_) => ErrorClass::Usage,
            Error::Underdetermined { .. }
            | Error::NonFinite(_)
            | Error::Dimension(_)
            | Error::UndefinedR2 => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}
