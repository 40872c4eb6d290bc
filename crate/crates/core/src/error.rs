use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid Poincaré transform: {0}")]
    InvalidTransform(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("states live on different grids or frames")]
    GridMismatch,
    #[error("source region is empty")]
    EmptyRegion,
    #[error("state support overflows the grid: {0}")]
    SupportOverflow(String),
    #[error("projection annihilates the state (norm {0:e})")]
    ProjectionAnnihilates(f64),
    #[error("slice frame does not match the state's native frame")]
    FrameMismatch,
    #[error("mantle leaves the position box: {0}")]
    MantleOutsideGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed state file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
