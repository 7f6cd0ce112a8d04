use thiserror::Error;

/// Errors raised by the evaluators, constructors and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight array has length {got}, grid has {expected} cells")]
    WeightLength { expected: usize, got: usize },

    #[error("coordinate {value} of point {point} is outside [0, 1)")]
    CoordinateOutOfRange { point: usize, value: String },

    #[error("invalid grid: order {order} and dimension {dim} must both be at least 1")]
    InvalidGrid { order: usize, dim: usize },

    #[error("eta is not reflection symmetric at s = {m}/{order}")]
    AsymmetricEta { m: usize, order: usize },

    #[error("pair potential is not symmetric at ({m}/{order}, {n}/{order})")]
    AsymmetricPair { m: usize, n: usize, order: usize },

    #[error("row sums differ for M = {order}: row {first} sums to {first_sum}, row {second} sums to {second_sum}")]
    RowSumMismatch {
        order: usize,
        first: usize,
        second: usize,
        first_sum: String,
        second_sum: String,
    },

    #[error("operation requires a canonical (translation invariant) energy triple")]
    NotCanonical,

    #[error("not a weak Latin hypercube: axis {axis} row {fixed:?} contains {count} points")]
    RowViolation {
        axis: usize,
        fixed: Vec<usize>,
        count: usize,
    },

    #[error("hypercube table has {got} entries, expected {expected}")]
    TableShape { expected: usize, got: usize },

    #[error("value {value} at position {position} is not below the order {order}")]
    ValueOutOfRange {
        position: usize,
        value: usize,
        order: usize,
    },

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("instance too large: {reason} (estimated size {estimate})")]
    Infeasible { reason: String, estimate: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
