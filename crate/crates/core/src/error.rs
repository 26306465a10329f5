use thiserror::Error;

pub type Result<T> = std::result::Result<T, DpError>;

#[derive(Debug, Error)]
pub enum DpError {
    /// Arguments outside the operation's domain (bad index, arity, variant).
    #[error("input domain error: {0}")]
    InputDomain(String),
    /// A configured enumeration budget would be exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// A precondition the caller promised does not hold.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DpError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DpError::InputDomain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        DpError::Resource(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        DpError::Contract(msg.into())
    }

    /// Process exit status used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            DpError::Resource(_) => 3,
            DpError::Io(_) => 4,
            _ => 2,
        }
    }
}
