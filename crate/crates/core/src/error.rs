use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("column has ties at value {value}; jitter the data before computing rank correlation")]
    TiesDetected { value: f64 },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("requested k = {k} exceeds the {d} available candidates")]
    KTooLarge { k: usize, d: usize },

    #[error("undefined population correlation: zero denominator with zero target coefficient")]
    InvalidPopulationSpec,

    #[error("actual values are all identical; R² is undefined")]
    ConstantActuals,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("subsets of {rows} rows are too small (need at least {needed})")]
    SubsetTooSmall { rows: usize, needed: usize },

    #[error("{path}: missing value at row {row}, column '{column}'")]
    MissingValue { path: PathBuf, row: usize, column: String },

    #[error("{path}: non-numeric cell '{cell}' at row {row}, column '{column}'")]
    NonNumeric { path: PathBuf, row: usize, column: String, cell: String },

    #[error("{path}: need at least 2 data rows, found {rows}")]
    TooFewRows { path: PathBuf, rows: usize },

    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("privacy ledger violation: composed ({epsilon}, {delta}) != configured ({expected_epsilon}, {expected_delta})")]
    LedgerViolation { epsilon: f64, delta: f64, expected_epsilon: f64, expected_delta: f64 },

    #[error("exact (noiseless) mode is not permitted here")]
    ExactModeRejected,

    #[error("inconsistent reports: {0}")]
    InconsistentReports(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
