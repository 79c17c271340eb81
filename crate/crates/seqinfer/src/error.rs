//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Error`]. The CLI maps
//! configuration-phase errors to exit code 2 and execution-phase errors to
//! exit code 3; the library itself makes no such distinction.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A resampling population (empirical or shifted-empirical) was built
    /// from, or asked to draw from, an empty list of values.
    #[error("empty resampling support")]
    EmptyResamplingSupport,

    /// A stopped sample with fewer than two observations cannot yield a
    /// covariance estimate.
    #[error("degenerate sample")]
    DegenerateSample,

    /// The estimated standard deviation of the target functional is zero,
    /// so studentized pivots are undefined.
    #[error("zero estimated variance")]
    ZeroEstimatedVariance,

    /// A probability or other numeric argument was outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input sequence ended before the stopping rule could resolve.
    #[error("sequence ended after {got} elements; stopping rule may need up to {needed}")]
    ShortSequence { got: usize, needed: usize },

    /// Rule constants failed validation (need a > 0 and 1 <= n1 <= n0).
    #[error("invalid stopping rule: {0}")]
    InvalidRule(String),

    /// Mismatched dimensions between rule, observation map, or functional.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A configuration file or run configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A data file could not be parsed; `line` is 1-based.
    #[error("{path}:{line}: could not parse '{token}' as a number")]
    DatasetParse {
        path: String,
        line: usize,
        token: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
