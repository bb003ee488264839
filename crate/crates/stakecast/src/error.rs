//! Crate-wide error type.

use chrono::NaiveDate;

use crate::series::FeatureKind;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by series construction, ingestion, fitting, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A series violated a structural invariant at construction time.
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// An interior gap exceeded the permitted `max_gap` during repair.
    #[error("gap of {gap_days} missing days after {after} exceeds max gap of {max_gap}")]
    GapTooLarge {
        after: NaiveDate,
        gap_days: i64,
        max_gap: u32,
    },

    /// The input feeds share no common dates.
    #[error("feeds share no common date range")]
    EmptyIntersection,

    /// A CSV row (or the file as a whole) could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    /// Two rows of a feed carry the same date.
    #[error("{path}: duplicate date {date}")]
    DuplicateDate { path: String, date: NaiveDate },

    /// A schema column is absent from the CSV header.
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: String, column: String },

    /// A synthetic-series spec violated its invariants.
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    /// Not enough observations at or before the forecast origin.
    #[error("insufficient history: need {needed} observations, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    /// The frame is too short to build a single lag row.
    #[error("frame too short: need at least {needed} days, have {available}")]
    FrameTooShort { needed: usize, available: usize },

    /// A requested feature is not present in the frame.
    #[error("missing feature: {0}")]
    MissingFeature(FeatureKind),

    /// The unridged normal equations are singular.
    #[error("degenerate system: normal equations are singular")]
    DegenerateSystem,

    /// Feature vector length does not match the fitted coefficients.
    #[error("dimension mismatch: model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The series is shorter than one train + test fold.
    #[error("series of {len} days is shorter than one {train}+{test}-day fold")]
    NoFolds {
        len: usize,
        train: usize,
        test: usize,
    },

    /// The mean of the actual values is zero, so RMSE/mean is undefined.
    #[error("mean of actual values is zero; rmse/mean undefined")]
    ZeroMean,

    /// Paired sequences differ in length or are empty.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
