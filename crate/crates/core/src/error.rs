use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AgpError>;

#[derive(Debug, Error)]
pub enum AgpError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("sweep has no node with a positive score")]
    EmptySweep,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl AgpError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        AgpError::Config(msg.into())
    }
}
