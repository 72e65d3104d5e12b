use thiserror::Error;

/// Errors produced by the norm, averaging and embedding routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value {value} is outside the attainable range (sup = {sup})")]
    Range { value: f64, sup: f64 },

    #[error("degenerate Orlicz function (vanishes on a neighbourhood of 0) where a strict one is required")]
    Degenerate,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("exact enumeration needs {required} terms but the budget is {budget}; use Monte Carlo mode")]
    BudgetExceeded { required: f64, budget: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
