use thiserror::Error;

/// Errors raised across the solver and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids or time grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exponent relation of the index family failed.
    #[error("exponent constraint violated: {0}")]
    IndexConstraint(String),

    #[error("field is not mean-free (zero mode {mean:.3e} against scale {scale:.3e}); negative-order multiplier is ill-posed")]
    NonZeroMean { mean: f64, scale: f64 },

    #[error("initial velocity is not divergence-free (max |div u0| = {0:.3e})")]
    NotDivergenceFree(f64),

    /// Picard iteration stalled or diverged; data too large for the smallness hypothesis.
    #[error("Picard iteration did not converge (contraction factor {contraction:.3}, {iterations} iterations); data violate the smallness hypothesis")]
    NonConvergence {
        contraction: f64,
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("exponential integrator blew up at step {step} (norm {norm:.3e} vs data norm {data_norm:.3e})")]
    Unstable { step: usize, norm: f64, data_norm: f64 },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
