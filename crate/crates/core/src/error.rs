use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} is outside the probability range [0, 1]")]
    Domain { value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change found for {what} on ({lo}, {hi})")]
    Bracket { what: String, lo: f64, hi: f64 },

    #[error("resource guard exceeded: {0}")]
    Resource(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON input: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
