use std::path::PathBuf;

use crate::baselines::Method;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: line {line}: duplicate isbn {isbn}")]
    DuplicateIsbn {
        path: PathBuf,
        line: usize,
        isbn: String,
    },

    #[error("{path}: row {row}: empty author list")]
    EmptyAuthors { path: PathBuf, row: usize },

    #[error("state schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("state file is not a valid state document: {0}")]
    Schema(String),

    #[error("value {value} is outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no {0} trust values have been computed for this state")]
    Stale(Method),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
