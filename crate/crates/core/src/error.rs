use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    /// The integrator produced a non-finite value.
    #[error("numerical blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("background trajectory does not cover t = {t} (stored range [{start}, {end}])")]
    CoverageGap { t: f64, start: f64, end: f64 },

    #[error("background is not periodic: relative deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotPeriodic { deviation: f64, tolerance: f64 },

    #[error("lambda = {0} lies on the spectrum of B d_xx")]
    OnSpectrum(num_complex::Complex64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
