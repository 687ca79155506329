use thiserror::Error;

/// Errors raised while building, loading or analysing games.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("non-square payoff table: {rows} rows, row {row} has {cols} entries")]
    NonSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("game has no actions")]
    Empty,

    #[error("duplicate action label {0:?}")]
    DuplicateAction(String),

    #[error("non-finite payoff at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("integer payoff {value} at ({row}, {col}) exceeds the exact range of +/-2^48")]
    OutOfExactRange { row: usize, col: usize, value: i128 },

    #[error("unknown action {0:?}")]
    UnknownAction(String),

    #[error("no exact potential: path-dependence at {context} (violation {violation})")]
    NoExactPotential { context: String, violation: f64 },

    #[error("relative payoffs are not separable: pair ({x}, {y}) off by {violation}")]
    NotSeparable { x: usize, y: usize, violation: f64 },

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("invalid catalog spec: {0}")]
    InvalidCatalog(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("empty action grid")]
    EmptyGrid,

    #[error("enumeration of {sequences} opponent sequences exceeds the limit of {limit}")]
    SizeGuard { sequences: u128, limit: u128 },

    #[error("action index {index} out of range for {n} actions")]
    BadIndex { index: usize, n: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
