use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported discretization: {0}")]
    Discretization(String),

    #[error("field/grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("K not in L^r: {0} (existence hypotheses unavailable)")]
    NotIntegrable(String),

    #[error("coupling undefined: {0}")]
    Coupling(String),

    #[error("no Nehari projection: {0}")]
    Projection(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
