use thiserror::Error;

/// Failures shared by every module of the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too coarse: {points:.1} points across the characteristic width (need at least {required})")]
    GridTooCoarse { points: f64, required: usize },

    #[error("aliasing risk: frequency {frequency} exceeds the Nyquist limit {nyquist}")]
    AliasingRisk { frequency: f64, nyquist: f64 },

    #[error("spectral tail beyond u = {cutoff} contributes {tail:e}, above the allowed {allowed:e}")]
    SpectralTail { cutoff: f64, tail: f64, allowed: f64 },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("vector is not timelike and future-directed: {0:?}")]
    NotTimelike([f64; 4]),

    #[error("vector is not null and future-directed: {0:?}")]
    NotNull([f64; 4]),

    #[error("Fock space dimension {dimension} exceeds the cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("operator annihilates the vacuum")]
    AnnihilatesVacuum,

    #[error("quadrature resolution: {0}")]
    Resolution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
