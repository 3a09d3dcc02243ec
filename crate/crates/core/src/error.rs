use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid problem specification: {0}")]
    Specification(String),

    #[error("block {block} out of range ({blocks} blocks)")]
    BlockIndex { block: usize, blocks: usize },

    #[error("Pareto front has {size} vectors, above the enumeration cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("reference set would hold {count} points, above the cap {cap}")]
    TooManyPoints { count: u128, cap: u128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oracle input has {size} distinct vectors, above the cap {cap}")]
    OracleTooLarge { size: usize, cap: usize },

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("empty input")]
    Empty,

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
