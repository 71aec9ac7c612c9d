use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{count} record(s) disagree with the sort oracle")]
    Mismatch { count: usize },

    #[error(transparent)]
    Select(#[from] cgm_select::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for oracle mismatches, 2 for usage and configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch { .. } => 1,
            _ => 2,
        }
    }
}
