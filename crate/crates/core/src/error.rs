use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} samples, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} component(s), got {actual}")]
    ComponentMismatch { expected: usize, actual: usize },

    #[error("operation requires a {required}D grid, field is {actual}D")]
    DimensionMismatch { required: usize, actual: usize },

    #[error("wave vector must be nonzero")]
    ZeroWaveVector,

    #[error("input is not divergence-free (relative divergence {0:.3e})")]
    NotDivergenceFree(f64),

    #[error("field has nonzero mean mode ({0:.3e})")]
    NonzeroMean(f64),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("spectrum not supported in the required region: {0}")]
    UnsupportedSpectrum(String),

    #[error("support reaches the interior mask boundary (edge gradient ratio {0:.3e})")]
    SupportAtMaskBoundary(f64),

    #[error("numerical breakdown at Picard iteration {iteration}: {reason}")]
    Breakdown {
        iteration: usize,
        reason: String,
        diagnostics: Box<crate::picard::IterationDiagnostics>,
    },

    #[error(transparent)]
    Checkpoint(#[from] crate::checkpoint::CheckpointError),
}

pub type Result<T> = std::result::Result<T, Error>;
