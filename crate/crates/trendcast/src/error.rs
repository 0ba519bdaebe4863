use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("empty input")]
    Empty,
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("line {line}: {detail}")]
    Malformed { line: u64, detail: String },
    #[error(transparent)]
    Invalid(#[from] trendcast_core::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {detail}")]
    Value { key: String, detail: String },
    #[error("{0}")]
    Invalid(String),
}

/// Top-level failure of a CLI command.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: CsvError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] trendcast_core::Error),
    #[error("model file: {0}")]
    Model(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}
