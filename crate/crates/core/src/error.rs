use alloc::string::String;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bar invariant violated at {date}: {detail}")]
    BarInvariant { date: NaiveDate, detail: String },

    #[error("non-increasing dates: {prev} followed by {next}")]
    NonIncreasingDates { prev: NaiveDate, next: NaiveDate },

    #[error("series too short: need at least {required} bars, got {available}")]
    SeriesTooShort { required: usize, available: usize },

    #[error("input too short: need at least {required} values, got {available}")]
    InputTooShort { required: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {what} at row {row}, column {col}")]
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },

    #[error("column mismatch: model expects {expected:?}, got {got:?}")]
    ColumnMismatch {
        expected: alloc::vec::Vec<String>,
        got: alloc::vec::Vec<String>,
    },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("optimizer failed to converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    Divergence { iterations: usize, gradient_norm: f64 },

    #[error("fit failed for window ending at row {index}: {source}")]
    WindowFit {
        index: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("too many features for exact enumeration: {features} > {max}")]
    TooManyFeatures { features: usize, max: usize },
}
