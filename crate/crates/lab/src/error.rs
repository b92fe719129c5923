use thiserror::Error;
use zeno_core::ZenoError;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] ZenoError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
