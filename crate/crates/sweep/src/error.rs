use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Model(#[from] fpsteady::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SweepError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) => 2,
            SweepError::Io(_) | SweepError::Json(_) => 3,
            SweepError::Model(_) => 4,
        }
    }
}

pub type Result<T, E = SweepError> = std::result::Result<T, E>;
