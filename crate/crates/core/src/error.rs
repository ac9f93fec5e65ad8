use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{a} is not invertible modulo {modulus}")]
    NotInvertible { a: i64, modulus: u64 },

    #[error("work limit exceeded: {work} terms requested, limit is {limit}")]
    WorkLimit { work: u128, limit: u128 },

    /// A fast evaluation path does not cover these parameters; callers fall back to brute force.
    #[error("evaluation strategy unavailable: {0}")]
    StrategyUnavailable(&'static str),

    #[error("parameters outside the validity range: {0}")]
    OutOfRange(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
