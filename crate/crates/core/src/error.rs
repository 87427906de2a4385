use thiserror::Error;

/// Errors raised by the engines and constructors in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error(
        "malformed function: position {position} maps to {value}, outside a carrier of size {size}"
    )]
    MalformedFunction {
        position: usize,
        value: usize,
        size: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subset mask {mask:#b} lies outside the powerset of a {size}-element carrier")]
    MaskOutOfRange { mask: u64, size: usize },

    #[error("carrier of size {size} exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("unknown action index {0}")]
    UnknownAction(usize),

    #[error("invalid system:\n  {}", .0.join("\n  "))]
    InvalidSystem(Vec<String>),

    #[error("relation is not an equivalence: {0}")]
    NotEquivalence(String),

    #[error("carrier is not closed under the backward dynamics: {0}")]
    ClosureViolation(String),

    #[error("relation is not a post-fixpoint of the step operator: {0}")]
    NotPostFixpoint(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
