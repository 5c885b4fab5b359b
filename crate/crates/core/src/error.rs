use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode layout: {0}")]
    InvalidLayout(String),

    #[error("mode {mode} out of range for {total} modes")]
    ModeOutOfRange { mode: usize, total: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not diagonal in the occupation basis (off-diagonal norm {0:e})")]
    NotDiagonal(f64),

    #[error("operator maps the charge-zero block outside of itself")]
    LeavesBlock,

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("density matrix lost positivity: minimum eigenvalue {min_eig:e} at t = {t}")]
    Positivity { t: f64, min_eig: f64 },

    #[error("trajectory {index} aborted: {source}")]
    TrajectoryAbort {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no convergence after {steps} steps (residual {residual:e})")]
    NotConverged { steps: usize, residual: f64 },

    #[error("{what} = {value} outside the supported domain")]
    Domain { what: &'static str, value: f64 },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Index of the trajectory that aborted, if this error came from one.
    pub fn trajectory_index(&self) -> Option<usize> {
        match self {
            Error::TrajectoryAbort { index, .. } => Some(*index),
            _ => None,
        }
    }
}
