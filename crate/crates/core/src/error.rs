//! Error type shared by every module in the crate.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value failed domain validation (negative price, zero lifetime, ...).
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    /// The requested quantity is undefined for the given inputs
    /// (e.g. a capital recovery factor at a zero discount rate).
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {reason}")]
    Csv { path: PathBuf, reason: String },

    #[error("malformed JSON in {path}: {reason}")]
    Json { path: PathBuf, reason: String },

    /// Input series that must share a length do not.
    #[error("length mismatch: {context} (expected {expected}, found {found})")]
    LengthMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    /// Timestamps must be strictly increasing with uniform spacing.
    #[error("non-monotonic or non-uniform timestamp at data row {row} of {path}")]
    BadTimestamp { path: PathBuf, row: usize },

    /// A physical quantity that must be non-negative is negative.
    #[error("negative value in column {column} at data row {row} of {path}")]
    NegativeValue {
        path: PathBuf,
        column: &'static str,
        row: usize,
    },

    /// NaN or infinity where a finite number is required.
    #[error("non-finite value in column {column} at data row {row} of {path}")]
    NonFinite {
        path: PathBuf,
        column: &'static str,
        row: usize,
    },

    /// The requested computation exceeds a configured work or size limit.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A solver assignment is missing a variable the model requires.
    #[error("missing variable in assignment: {0}")]
    MissingVariable(String),

    /// Text that should be a model or assignment does not parse.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
