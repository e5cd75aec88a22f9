//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, got {actual}")]
    InputTooShort { needed: usize, actual: usize },

    #[error("invalid window length {0}: must be at least 2")]
    InvalidWindow(usize),

    #[error("invalid stride {0}: must be at least 1")]
    InvalidStride(usize),

    #[error("invalid fuzzy coefficient m={0}: must lie in (1, 2]")]
    InvalidFuzzyCoefficient(f64),

    #[error(
        "invalid weight exponent q={0}: must lie in (-inf, 0) or (1, +inf); \
         q=0 collapses the metric to plain Euclidean distance and q=1 puts all \
         weight on a single dimension"
    )]
    InvalidWeightExponent(f64),

    #[error("invalid cluster count c={0}: must be at least 2")]
    InvalidClusterCount(usize),

    #[error("invalid convergence tolerance epsilon={0}: must be positive")]
    InvalidEpsilon(f64),

    #[error("invalid max_iters: must be at least 1")]
    InvalidMaxIters,

    #[error("dimension mismatch: expected {expected} dimensions, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("invalid label {value} at row {row}: labels must be 0 or 1")]
    InvalidLabel { row: usize, value: String },

    #[error("labels length {labels} does not match series length {series}")]
    LabelLengthMismatch { labels: usize, series: usize },

    #[error("insufficient data: {windows} windows for {clusters} clusters")]
    InsufficientData { windows: usize, clusters: usize },

    #[error("metric undefined: need at least one positive and one negative label")]
    UndefinedMetric,

    #[error("score file has no label column; evaluation needs labels")]
    MissingLabels,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("model serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: user and input errors map to 2,
    /// anything else to 1.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
