use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain an operation accepts.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("state {state} has zero visit count and cannot be time-reversed")]
    Unreachable { state: usize },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e}) within {budget} nodes")]
    Quadrature {
        tolerance: f64,
        estimate: f64,
        budget: usize,
    },

    #[error("path {path} not absorbed after {steps} steps ({completed} paths completed)")]
    Timeout {
        path: u64,
        steps: u64,
        completed: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
