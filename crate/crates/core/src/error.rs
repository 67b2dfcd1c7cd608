use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("need at least 2 observations, got {0}")]
    TooSmall(usize),

    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },

    #[error("degenerate data: {0}")]
    Degenerate(&'static str),

    #[error("out of range: {0}")]
    Range(String),

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::TooSmall(_)
            | Error::NonFinite { .. }
            | Error::Range(_) => 2,
            Error::Degenerate(_) => 3,
            Error::TooLarge { .. } => 4,
        }
    }
}
