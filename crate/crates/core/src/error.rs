use thiserror::Error;

/// Errors raised by geometry construction, enumeration, and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("enumeration budget exceeded: more than {cap} items")]
    EnumerationBudget { cap: usize },

    #[error("solver budget exceeded: {0}")]
    SolverBudget(String),

    #[error("invalid clamp: {0}")]
    Clamp(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
