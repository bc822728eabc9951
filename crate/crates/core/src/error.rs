use std::path::PathBuf;

use thiserror::Error;

use crate::wall::BrickId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unsupported bond `{0}` (only `stretcher-running` is implemented)")]
    UnsupportedBond(String),

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid wall {path}: {reason}")]
    InvalidWall { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible instance: {reason} (bricks: {bricks:?})")]
    Infeasible { reason: String, bricks: Vec<BrickId> },

    #[error("export error: {0}")]
    Export(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
