use thiserror::Error;

#[derive(Debug, Error)]
pub enum CdeError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("example {index} has {found} features, expected {expected}")]
    FeatureLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported model version {0}")]
    UnsupportedVersion(u32),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed value {value:?} in column {column}")]
    Parse { column: String, value: String },
}

pub type Result<T> = std::result::Result<T, CdeError>;
