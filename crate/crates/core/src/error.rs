use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: grid has {expected} nodes, field has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite energy at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("profile format: {0}")]
    Format(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
