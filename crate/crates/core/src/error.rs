use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid integration request: {0}")]
    InvalidRequest(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("bisection bracket rejected: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
