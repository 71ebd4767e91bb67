//! The `sonolab` pipeline: analyze → summarize → model → contrasts → classify, plus synth and validate.

pub mod analyze;
pub mod commands;
pub mod config;
pub mod features;
pub mod manifest;
pub mod tables;

pub use config::RunConfig;
pub use features::{read_features, write_features, SchemaError};
pub use manifest::Manifest;

use sonolab::stats::StatsError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("{0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Schema(_) => 2,
            CliError::Empty(_) | CliError::Data(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EmptyInput => CliError::Empty(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
