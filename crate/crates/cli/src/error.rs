//! CLI error type and its exit codes.

use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing input {0}: run `gkrs build` first")]
    MissingInput(String),
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("computation failed: {0}")]
    Compute(#[from] gkrs::Error),
}

impl CliError {
    /// 2 for unusable inputs, 1 for failures during a run.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::MissingInput(_) | CliError::Io(..) => ExitCode::from(2),
            CliError::Output(_) | CliError::Compute(_) => ExitCode::from(1),
        }
    }
}
