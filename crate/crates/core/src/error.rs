use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{namespace} id {id} out of range (table holds {len})")]
    Lookup {
        namespace: &'static str,
        id: usize,
        len: usize,
    },

    #[error("unknown {namespace} '{name}'")]
    Unknown { namespace: &'static str, name: String },

    #[error("model file {}: section '{section}': {message}", path.display())]
    Format {
        path: PathBuf,
        section: &'static str,
        message: String,
    },

    #[error("non-finite parameter after update{}: {detail}", example.map(|i| format!(" on training example {i}")).unwrap_or_default())]
    NonFinite { example: Option<usize>, detail: String },

    #[error("cannot evaluate an empty split")]
    EmptySplit,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
