use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("kernel width eps = {eps} violates {bound} = {limit}")]
    KernelBounds {
        eps: f64,
        bound: &'static str,
        limit: f64,
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("negative density {value:e} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("non-finite value {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error(
        "linear solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("zero state: {0}")]
    ZeroState(&'static str),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("unsupported snapshot version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u8, supported: u8 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidField(_)
                | Error::KernelBounds { .. }
                | Error::GridMismatch
                | Error::InvalidParams(_)
                | Error::ZeroState(_)
                | Error::Config { .. }
                | Error::Snapshot(_)
                | Error::UnsupportedVersion { .. }
        )
    }
}
