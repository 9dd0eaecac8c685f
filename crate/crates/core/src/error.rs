use thiserror::Error;

/// Errors raised by archives, domains, optimizers and schedulers.
#[derive(Debug, Error)]
pub enum QdError {
    /// A solution produced a non-finite objective or measure.
    #[error("evaluation error: {0}")]
    Evaluation(String),
    /// Invalid construction parameters.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("archive is empty")]
    EmptyArchive,
    /// The CMA-ES distribution can no longer be sampled.
    #[error("degenerate CMA-ES state: {0}")]
    DegenerateState(String),
    /// An API was called out of order or with mismatched inputs.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QdError>;
