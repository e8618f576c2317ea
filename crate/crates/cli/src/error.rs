use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("solver failed: {0}")]
    Solve(#[from] amerput_core::Error),

    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    /// Process exit code: 1 configuration, 2 solve, 3 reference mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Config { .. } | CliError::Read { .. } => 1,
            CliError::Solve(_) | CliError::Write { .. } | CliError::Csv(_) | CliError::Json(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}
