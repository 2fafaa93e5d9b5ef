use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid pairing parameters: {0}")]
    InvalidParams(String),

    #[error("no parameters found for {bits}-bit group order after {attempts} attempts")]
    ParamSearch { bits: u32, attempts: usize },

    #[error("element {value} is outside {group}")]
    InvalidElement { group: &'static str, value: u64 },

    #[error("a table must contain at least one row")]
    EmptyTable,

    #[error("table row {index} fails recomputation: {reason}")]
    InvalidTuple { index: usize, reason: String },

    #[error("table exhausted: requested {requested} tuples, {remaining} remaining")]
    TableExhausted { requested: usize, remaining: usize },

    #[error("malformed response: expected {expected} values, got {got}")]
    MalformedResponse { expected: usize, got: usize },

    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),

    #[error("session keys must be nonzero")]
    ZeroSessionKey,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
