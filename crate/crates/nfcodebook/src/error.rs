use thiserror::Error;

/// Errors surfaced by the library. The CLI maps configuration problems to
/// exit code 2 and numerical failures to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidArray(String),
    #[error("invalid polar coordinate: {0}")]
    InvalidCoord(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("zero vector cannot be quantized")]
    ZeroVector,
    #[error("effective channel is singular (condition number {0:.3e})")]
    Singular(f64),
    #[error("Lloyd iteration did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        partial: Vec<f64>,
    },
    #[error("calibration has no solution: {0}")]
    Calibration(String),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::NotConverged { .. } | Error::Calibration(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
