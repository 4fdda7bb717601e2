use thiserror::Error;

use crate::construct::ConstructionTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    /// The simplex method exceeded its pivot budget. `last_iterate` holds the
    /// basic solution at the moment it gave up, in the caller's variables.
    #[error("LP solver failed after {pivots} pivots")]
    SolverFailure {
        pivots: usize,
        last_iterate: Vec<f64>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("approximation guarantee violated: chosen max regret {max_regret} exceeds {bound}")]
    GuaranteeViolation {
        max_regret: f64,
        bound: f64,
        trace: Box<ConstructionTrace>,
    },
}
