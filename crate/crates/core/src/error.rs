use thiserror::Error;

/// Errors raised by the kernels, walks, and balancers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("domain error: {what} = {value} ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("vector norm {norm} exceeds 1")]
    NormTooLarge { norm: f64 },
    #[error("full coloring did not finish within {cap} rounds")]
    RoundCapExceeded { cap: usize },
}

pub type Result<T> = std::result::Result<T, WalkError>;

pub(crate) fn domain(what: &'static str, value: f64, reason: &'static str) -> WalkError {
    WalkError::Domain {
        what,
        value,
        reason,
    }
}
