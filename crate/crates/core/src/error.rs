use thiserror::Error;

/// Errors raised by the partition calculus, map construction and moment evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed partition literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("partition on {points} points exceeds the enumeration limit of {limit}")]
    TooLarge { points: usize, limit: usize },

    #[error("partition has a block of odd size")]
    OddBlock,

    #[error("partition is not noncrossing")]
    Crossing,

    #[error("partition is not symmetric under the middle symmetry")]
    Asymmetric,

    #[error("evaluation needs {terms} terms, above the budget of {budget}")]
    Budget { terms: u128, budget: u128 },

    #[error("unknown builtin map {0:?}")]
    UnknownMap(String),

    #[error("matrix is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),

    #[error("partition is not eligible: {0}")]
    Ineligible(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    /// Two independent evaluation routes disagreed. This indicates a bug.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
