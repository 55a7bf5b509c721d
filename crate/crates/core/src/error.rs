use thiserror::Error;

use crate::coloring::Vertex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation
    /// (self-pairs, wrong color count, n < 2, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("vertex {vertex} out of range for universe of size {bound}")]
    Range { vertex: Vertex, bound: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A search or enumeration would exceed its configured budget.
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },

    #[error("largeness oracle violated its axioms: {0}")]
    OracleViolation(String),

    /// The universe is too small for the requested construction.
    #[error("insufficient universe: {reason} (need at least {required})")]
    Insufficient { reason: String, required: usize },

    /// A construction reached a state its correctness argument rules out.
    #[error("construction anomaly: {0}")]
    Anomaly(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
