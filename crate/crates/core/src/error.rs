use thiserror::Error;

#[derive(Debug, Error)]
pub enum TacError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("instance too large for exact evaluation: {0}")]
    TooLarge(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("market rejected order: {0}")]
    Rejected(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("model: {0}")]
    Model(#[from] boostcde::CdeError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TacError>;
