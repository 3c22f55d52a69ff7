use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{name}` used with arity {found}, expected {expected}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("missing weight for predicate `{0}`")]
    MissingWeight(String),

    #[error("unsupported sentence: {0}")]
    Unsupported(String),

    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("enumeration bound exceeded: {atoms} ground atoms > limit {limit}")]
    BoundExceeded { atoms: usize, limit: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
