use thiserror::Error;

use crate::formula::ParseError;

#[derive(Debug, Error)]
pub enum TgwError {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = TgwError> = std::result::Result<T, E>;

impl TgwError {
    pub fn resource(msg: impl Into<String>) -> Self {
        TgwError::Resource(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        TgwError::Precondition(msg.into())
    }

    pub fn certificate(msg: impl Into<String>) -> Self {
        TgwError::Certificate(msg.into())
    }
}
