use thiserror::Error;

/// Errors raised by the digilab operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid base {0}: the base must be at least 2")]
    InvalidBase(u64),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("invalid digit pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid digit {digit} for base {base}")]
    InvalidDigit { digit: u64, base: u32 },

    #[error("invalid coefficient table: {0}")]
    InvalidTable(String),

    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("interval too large for exact enumeration: {count} points exceed the cap {cap}")]
    TooLargeInterval { count: u128, cap: u64 },

    #[error("invalid interval family: {0}")]
    InvalidFamily(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shadowing hypothesis fails at index {index}: {reason}")]
    ShadowHypothesis { index: usize, reason: String },

    #[error("interval too small: {0}")]
    IntervalTooSmall(String),

    #[error("class error: {0}")]
    Class(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sequence spec error: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
