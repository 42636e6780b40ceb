use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },
    #[error("no records to write")]
    NoRecords,
    #[error(transparent)]
    Core(#[from] metapred_core::Error),
}

impl HarnessError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        HarnessError::Invalid { field, reason: reason.into() }
    }

    pub fn field(field: &'static str, err: metapred_core::Error) -> Self {
        HarnessError::Invalid { field, reason: err.to_string() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        HarnessError::Parse { what, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
