use thiserror::Error;

use crate::polytope::Polytope;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("ambient dimension mismatch: expected {expected}, found {found}")]
    AmbientMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for {len} maps")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid datum: {0}")]
    InvalidDatum(String),

    #[error("exponent component {index} = {value} is outside the allowed range")]
    ExponentOutOfRange { index: usize, value: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("subspace budget of {budget} exhausted")]
    BudgetExhausted {
        budget: usize,
        /// The last outer approximation reached before giving up.
        outer: Box<Polytope>,
    },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("value does not fit the JSON integer range: {0}")]
    IntegerOverflow(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
