use thiserror::Error;

use crate::domain::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: expected {expected} values, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: unknown token `{token}` for issue {issue}")]
    UnknownToken {
        line: usize,
        issue: usize,
        token: String,
    },

    #[error("invalid domain: {0}")]
    Invalid(ValidationReport),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("issue index {index} out of range 1..={issues}")]
    IssueOutOfRange { index: usize, issues: usize },

    #[error("invalid two-element subset: {0}")]
    InvalidPair(String),

    #[error("alignment mismatch: {0}")]
    Alignment(String),

    #[error("table for issue {issue} is not supportive at {args:?}")]
    NotSupportive { issue: usize, args: Vec<usize> },

    #[error("tuple is not an aggregator: the domain is not closed under it")]
    NotAggregator,

    #[error("operation requires a ternary aggregator, got arity {0}")]
    NotTernary(usize),

    #[error("operation requires a Boolean domain (every projection of size 2)")]
    NotBoolean,

    #[error("G_X is strongly connected; no vertex partition is available")]
    PartitionUnavailable,

    #[error("value error: {0}")]
    Value(String),

    #[error("witness format: line {line}: {message}")]
    WitnessFormat { line: usize, message: String },

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("unknown sort {0}")]
    UnknownSort(usize),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity(_))
    }
}
