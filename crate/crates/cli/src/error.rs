use std::fmt;

use swssb_core::Error as CoreError;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid input naming the offending field (exit 2).
    Config { field: String, reason: String },
    /// Simulation and theory inputs disagree (exit 2).
    Mismatch(Vec<String>),
    /// A trajectory aborted (exit 3).
    Abort { index: usize, reason: String },
    /// Anything else (exit 1).
    Other(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Mismatch(_) => 2,
            CliError::Abort { .. } => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, reason } => write!(f, "invalid config: `{field}`: {reason}"),
            CliError::Mismatch(keys) => write!(f, "parameter mismatch: {}", keys.join("; ")),
            CliError::Abort { index, reason } => write!(f, "trajectory {index} aborted: {reason}"),
            CliError::Other(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig { field, reason } => CliError::Config { field, reason },
            CoreError::Domain { what, value } => CliError::config(what, format!("value {value} outside the supported domain")),
            CoreError::TrajectoryAbort { index, source } => CliError::Abort {
                index,
                reason: source.to_string(),
            },
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(format!("json: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
