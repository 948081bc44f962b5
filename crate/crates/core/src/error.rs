use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the limit-setting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("selection left no bins in [{e_min}, {e_max}] keV with counts >= {min_counts}")]
    SelectionEmpty { e_min: f64, e_max: f64, min_counts: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes shared by the CLI exit codes and the C API status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Io,
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 2,
            ErrorClass::Io => 3,
            ErrorClass::Numerical => 4,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Numerical(_) => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }

    /// Stable short name used in machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::SelectionEmpty { .. } => "selection_empty",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Precondition(_) => "precondition",
            Error::Numerical(_) => "numerical",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Fails with a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("{name} must be finite and > 0, got {value}")))
    }
}

/// Fails with a domain error unless `p` lies in the open interval (0, 1).
pub(crate) fn require_open_unit(name: &str, p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {p}")))
    }
}
