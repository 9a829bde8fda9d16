use std::path::PathBuf;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] xlris_core::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error("external predictor: {0}")]
    External(#[from] ExternalError),
}

/// Failures of the external predictor process protocol, one variant per
/// distinct cause.
#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("empty predictor command")]
    EmptyCommand,

    #[error("could not start `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },

    #[error("`{command}` exited with {status}: {stderr}")]
    NonZeroExit {
        command: String,
        status: String,
        stderr: String,
    },

    #[error("response file missing: {0}")]
    MissingFile(PathBuf),

    #[error("{file}: expected {expected} values, got {got}")]
    ShapeMismatch { file: String, expected: usize, got: usize },

    #[error("{file} row {row}: entry {value} is negative or not finite")]
    InvalidEntry { file: String, row: usize, value: f32 },

    #[error("{file} row {row}: sums to {sum}")]
    NotNormalized { file: String, row: usize, sum: f64 },
}
