use serde::Serialize;
use soliton_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Lab(#[from] LabError),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Output { .. } => EXIT_USAGE,
            CliError::Lab(e) if e.is_usage() => EXIT_USAGE,
            CliError::Lab(e) if e.is_hypothesis_violation() => EXIT_HYPOTHESIS,
            CliError::Lab(_) => EXIT_NUMERICAL,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_HYPOTHESIS => "hypothesis",
            _ => "numerical",
        }
    }

    pub fn record(&self, command: Option<&str>, config_sha256: Option<&str>) -> ErrorRecord {
        ErrorRecord {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            command: command.map(str::to_owned),
            config_sha256: config_sha256.map(str::to_owned),
        }
    }
}

/// The JSON error record printed on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
    pub command: Option<String>,
    pub config_sha256: Option<String>,
}
