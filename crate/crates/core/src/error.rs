use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed MR: {0}")]
    MalformedMr(String),

    #[error("placeholder {0} has no matching slot in the table")]
    UnboundPlaceholder(String),

    #[error("rule syntax error on line {line}: {message}")]
    RuleSyntax { line: usize, message: String },

    #[error("duplicate rule for slot '{slot}' with condition {condition}")]
    DuplicateRule { slot: String, condition: String },

    #[error("pattern error on line {line}: {message}")]
    PatternError { line: usize, message: String },

    #[error("report has zero slots")]
    ZeroSlots,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("search left slot '{0}' uncovered; its phrase rule does not contain the value")]
    Infeasible(String),

    #[error("corpus format error at {path}:{line}: {message}")]
    CorpusFormat {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("remote scorer unavailable: {0}")]
    RemoteUnavailable(String),

    #[error("remote scorer protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that originate in the remote scorer connection.
    pub fn is_remote(&self) -> bool {
        matches!(self, Error::RemoteUnavailable(_) | Error::Protocol(_))
    }
}
