use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("worker index {index} out of range for {n} workers")]
    WorkerIndex { index: usize, n: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("trial {trial} of solver `{solver}`: {source}")]
    Trial {
        solver: String,
        trial: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("I/O error at {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
