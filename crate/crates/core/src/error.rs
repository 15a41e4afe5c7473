use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("group order {order} exceeds the enumeration cap {cap}")]
    TooLarge { order: u128, cap: usize },
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("invalid generating set: {0}")]
    InvalidGeneratingSet(String),
    #[error("element {0} is not in the group")]
    UnknownElement(String),
    #[error("bad group descriptor `{0}`")]
    BadDescriptor(String),

    #[error("vertex count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("invalid edge selection: {0}")]
    InvalidSelection(String),
    #[error("graph is not {expected}-regular (vertex {vertex} has degree {found})")]
    NotRegular {
        expected: u64,
        vertex: usize,
        found: u64,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix size {n} exceeds the eigensolver cap {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("spectrum too small: need at least {needed} eigenvalues, have {have}")]
    TooSmall { needed: usize, have: usize },
    #[error("bad interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("hypothesis failed: {0}")]
    HypothesisFailure(String),
    #[error("no generating set found after {tried} candidates")]
    SearchExhausted { tried: u64 },
    #[error("sampler gave up after {tries} attempts: {detail}")]
    RetryExhausted { tries: u64, detail: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
