use thiserror::Error;

/// Errors raised by the engine.
///
/// Everything except [`Error::Internal`] is caused by the input (malformed
/// structures, bad expressions, unsupported fragments) and maps to exit
/// code 1 in the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unassigned free variable `{0}`")]
    Unassigned(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("limit exceeded: {0}")]
    Limit(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numeric predicate oracle failed: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for this error: 2 for internal failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
