//! Error type shared across the crate.

use std::io;

/// Errors produced by estimation, detection, and I/O operations.
///
/// Variants are grouped by how a caller should react: `Parse` and `Io` are
/// input problems, everything else is a domain violation (bad parameter or a
/// protocol precondition that does not hold).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An operation that consumes scores or points received an empty input.
    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value {value} in {context}")]
    NonFinite { context: &'static str, value: f64 },

    /// Alien fraction outside (0, 1].
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),

    /// Quantile level outside (0, 1).
    #[error("q must lie in (0, 1), got {0}")]
    InvalidQuantile(f64),

    /// Confidence parameter outside (0, 1).
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    /// Error tolerance outside (0, 1 - q).
    #[error("epsilon must lie in (0, {limit}), got {epsilon}")]
    InvalidEpsilon { epsilon: f64, limit: f64 },

    /// A configuration field failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Rows with inconsistent dimensionality, or a model applied to points
    /// of the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Isotonized values were requested before `isotonize_and_clip` ran.
    #[error("isotonized CDF values not populated; run isotonize_and_clip first")]
    IsotonizationRequired,

    /// Held-out scoring is impossible for a row that every ensemble member
    /// trained on.
    #[error("row {row} was used by every ensemble member; no held-out score exists")]
    NeverHeldOut { row: usize },

    /// A text input failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A persisted file has an unknown format tag or unsupported version.
    #[error("unsupported file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by unreadable, malformed, or empty input
    /// data, as opposed to invalid parameters or protocol violations.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Parse { .. }
                | Error::Csv(_)
                | Error::Format(_)
                | Error::Json(_)
                | Error::EmptySample(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
