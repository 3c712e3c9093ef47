use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} exceeds the evaluation cap {cap}")]
    OverflowDomain { value: f64, cap: f64 },

    #[error("Young function is not strictly increasing on [0, cap]; no inverse")]
    NotInvertible,

    #[error("invalid Young function: {0}")]
    InvalidYoung(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid test function: {0}")]
    InvalidFunction(String),

    #[error("point {x} lies outside [{a}, {b}]")]
    OutOfInterval { x: f64, a: f64, b: f64 },

    #[error("intervals do not match: [{0}, {1}] vs [{2}, {3}]")]
    IncompatibleIntervals(f64, f64, f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
