use std::io;

use thiserror::Error;

/// Errors raised while loading inputs or evaluating assignments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("unknown verb `{0}`")]
    UnknownVerb(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("instance too large: {size} candidate assignments exceed the limit of {limit}")]
    InstanceTooLarge { size: u128, limit: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
