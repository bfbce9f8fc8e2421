use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical input lies outside the domain where the model is defined.
    #[error("{module}: {message}")]
    Domain {
        module: &'static str,
        message: String,
    },

    #[error("mode index {index} out of range for a space with {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not hermitian: max |H - H^dag| = {deviation:e} (scale {scale:e})")]
    NotHermitian { deviation: f64, scale: f64 },

    #[error("requested {requested} eigenvalues from a space of dimension {dimension}")]
    TooManyLevels { requested: usize, dimension: usize },

    #[error("Hilbert space dimension {dimension} exceeds the limit of {limit} states; reduce the Fock cutoffs")]
    DimensionOverflow { dimension: usize, limit: usize },

    #[error("integration failed at t = {t:e} s (step {step:e} s): {detail}")]
    Integration { t: f64, step: f64, detail: String },

    #[error("eigensolver failed: {0}")]
    Convergence(String),
}

impl Error {
    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }

    /// True for errors caused by a numerical method rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Integration { .. } | Error::Convergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
