use thiserror::Error;

use crate::tree::VertexId;

#[derive(Debug, Error)]
pub enum ZipperError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed configuration: {0}")]
    MalformedConfiguration(String),

    #[error("configuration is not zipper-admissible")]
    NotAdmissible,

    #[error("enumeration guard exceeded: {count} configurations > limit {limit}")]
    EnumerationGuard { count: u128, limit: u128 },

    #[error("boundary law not defined at {vertex} (horizon {horizon})")]
    HorizonExceeded { vertex: VertexId, horizon: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ZipperError>;
