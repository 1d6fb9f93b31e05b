use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {what}: {source}")]
    Json { what: String, source: serde_json::Error },
    #[error("malformed CSV in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] prefgame::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
