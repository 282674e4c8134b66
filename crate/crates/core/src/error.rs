use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("{0}")]
    Validation(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// The fBM covariance of increments lost positive definiteness.
    #[error("fBM covariance is not positive definite at increment {index} (H = {hurst}); H is too close to 1 for this mesh")]
    NotPositiveDefinite { index: usize, hurst: f64 },

    #[error("flow state modulus {modulus:e} fell below the singularity floor at step {step}")]
    Singularity { step: usize, modulus: f64 },

    #[error("Euler iterate crossed the real axis at step {step} (Im = {imag:e})")]
    Crossing { step: usize, imag: f64 },

    #[error("point swallowed at t = {time} (|g - lambda| = {gap:e})")]
    Swallowed { time: f64, gap: f64 },

    #[error("time horizons differ: {0} vs {1}")]
    HorizonMismatch(f64, f64),

    /// Input unsuitable for an estimator (e.g. a point set with no extent).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of a numerical invariant rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::Singularity { .. }
                | Error::Crossing { .. }
                | Error::Swallowed { .. }
        )
    }
}
