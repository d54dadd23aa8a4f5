use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("limit does not exist at requested accuracy at x = {x}: fit residual {residual:.3e} > {tolerance:.3e}")]
    LimitNotFound { x: f64, residual: f64, tolerance: f64 },

    #[error("singular or ill-conditioned diagonal block at node {node} (condition estimate {condition:.3e})")]
    Singular { node: usize, condition: f64 },

    #[error("numerical breakdown: {0}")]
    Breakdown(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
