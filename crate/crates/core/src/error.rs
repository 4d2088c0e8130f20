//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("multiplication table is not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("multiplication table has no two-sided identity")]
    NoIdentity,
    #[error("element {element} has no two-sided inverse")]
    NoInverse { element: usize },
    #[error("Cayley table is not square or contains an out-of-range index")]
    MalformedTable,
    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },
    #[error("operands belong to different groups: {context}")]
    GroupMismatch { context: String },
    #[error("element index {index} is out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("{what} is not symmetric (closed under inverses)")]
    NotSymmetric { what: String },
    #[error("{what} does not contain the identity")]
    MissingIdentity { what: String },
    #[error("{what} must be nonempty")]
    EmptyInput { what: String },
    #[error("exact search exceeded the node budget of {budget}")]
    SearchBudgetExceeded { budget: u64 },
    #[error("family of {size} members exceeds the exhaustive union cap {cap}")]
    FamilyTooLargeForExhaustive { size: usize, cap: usize },
    #[error("{what} exceeds the hard cap for this operation ({detail})")]
    CapExceeded { what: String, detail: String },
    #[error("permutation is not an automorphism: {reason}")]
    NotAutomorphism { reason: String },
    /// A quantity the theory guarantees failed to hold. Always an
    /// implementation bug (or a corrupted certificate), never a valid outcome.
    #[error("lemma check `{lemma}` failed: {detail}")]
    LemmaViolation { lemma: String, detail: String },
    #[error("oracle/pipeline mismatch on field `{field}`: {detail}")]
    OracleMismatch { field: String, detail: String },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn lemma(lemma: &str, detail: impl Into<String>) -> Self {
        Error::LemmaViolation {
            lemma: lemma.to_string(),
            detail: detail.into(),
        }
    }
}
