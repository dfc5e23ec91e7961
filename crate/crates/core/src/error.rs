use alloc::string::String;

use crate::query::Violation;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("head variable `{0}` does not occur in the body")]
    UnboundHeadVariable(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has arity {expected}, found {found} values")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("relation `{0}` is declared twice")]
    DuplicateRelation(String),
    #[error("{0} is outside the universe of the volume assignment")]
    OutsideUniverse(String),
    #[error("{0} is not an answer of the query")]
    NotAnAnswer(String),
    #[error("homomorphism enumeration exceeded the limit of {0} extensions")]
    ExtensionLimit(u64),
    #[error("{what} ({size}) exceeds the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("the query is not acyclic; use the naive engine or supply a tree decomposition")]
    NotAcyclic,
    #[error("the query is not self-join-free")]
    NotSelfJoinFree,
    #[error("the tree decomposition is not free-connex for the head variables")]
    NotFreeConnex,
    #[error("not an ultrametric: d({a},{c}) = {far} exceeds max(d({a},{b}), d({b},{c})) = {near}")]
    NotUltrametric {
        a: String,
        b: String,
        c: String,
        far: String,
        near: String,
    },
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(Violation),
    #[error("incompatible pairing: {0}")]
    IncompatiblePairing(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
