//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while building models or learning from data.
#[derive(Debug, Error)]
pub enum FgError {
    #[error("unknown variable id {0}")]
    UnknownVariable(u32),

    #[error("scope must be non-empty")]
    EmptyScope,

    #[error("scope ids must be strictly increasing, got {0:?}")]
    UnorderedScope(Vec<u32>),

    #[error("variable {variable} has cardinality {cardinality}, got value {value}")]
    ValueOutOfRange {
        variable: u32,
        value: u32,
        cardinality: u32,
    },

    #[error("table has {got} entries but the scope requires {expected}")]
    TableSizeMismatch { expected: usize, got: usize },

    #[error("non-finite table entry at index {0}")]
    NonFiniteEntry(usize),

    #[error("assignment mismatch: {0}")]
    ScopeMismatch(String),

    #[error("scopes must be disjoint but share {0:?}")]
    OverlappingScopes(Vec<u32>),

    #[error("{0:?} is not a subset of the target scope")]
    NotASubset(Vec<u32>),

    #[error("state space of {cells} cells exceeds the enumeration cap of {cap}")]
    CapExceeded { cells: u128, cap: u64 },

    #[error("zero empirical count for event over {scope:?} given {given:?}; collect more samples or use clipped mode")]
    ZeroCount { scope: Vec<u32>, given: Vec<u32> },

    #[error("query not supported by this distribution access: {0}")]
    UnsupportedQuery(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("canonical factors disagree on the baseline assignment")]
    InconsistentBaseline,

    #[error("factor scopes are not closed under non-empty subsets: missing {0:?}")]
    MissingClosureScope(Vec<u32>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FgError>;
