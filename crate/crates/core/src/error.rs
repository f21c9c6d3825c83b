//! Error type shared by all library modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("block index {l} outside decomposition range [{l_min}, {l_max}]")]
    BlockOutOfRange { l: i32, l_min: i32, l_max: i32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("equilibrium hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("temperature equation decouples (delta = 0); no Lyapunov weight gamma/delta")]
    DecoupledTemperature,

    #[error("Lyapunov form evaluates negative (K = {k} too large)")]
    LyapunovNotPositive { k: f64 },

    #[error("density floor breached at step {step}: min density ratio {min_density}")]
    DensityFloor { step: usize, min_density: f64 },

    #[error("solution magnitude overflowed at step {step}")]
    NormOverflow { step: usize },

    #[error("density floor breached in Picard iterate {iterate} at step {step}")]
    PicardDensityFloor { iterate: usize, step: usize },

    #[error("io error")]
    Io(#[from] std::io::Error),

    #[error("malformed field file: {0}")]
    BadFieldFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
