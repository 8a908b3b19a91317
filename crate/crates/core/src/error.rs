use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad class of an [`Error`], used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A physical or signal precondition was not met by the inputs.
    Precondition,
    /// A numerical routine failed or its result failed a post-check.
    Numerical,
    /// File or format problem.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Liouvillian null space has dimension {nullity}; the steady state is not unique")]
    DegenerateNullSpace { nullity: usize },

    #[error("steady-state residual {residual:e} exceeds bound {bound:e}")]
    SteadyStateResidual { residual: f64, bound: f64 },

    #[error("trace drifted to {trace} at t = {time:e} s (step size too large?)")]
    TraceDrift { time: f64, trace: f64 },

    #[error("density matrix lost positivity at t = {time:e} s: min eigenvalue {min_eigenvalue:e}")]
    Positivity { time: f64, min_eigenvalue: f64 },

    #[error("overmodulation: m_AM * max|V| = {depth} must be < 1")]
    Overmodulation { depth: f64 },

    #[error("sample rate {sample_rate} Hz is too low for content at {frequency} Hz (need {required} Hz)")]
    Aliasing {
        sample_rate: f64,
        frequency: f64,
        required: f64,
    },

    #[error("signal of {duration:e} s is shorter than the required {required:e} s")]
    InsufficientDuration { duration: f64, required: f64 },

    #[error("no step edge found in the response")]
    NoEdge,

    #[error("exponential fit residual {residual_rms:e} exceeds {bound:e}")]
    PoorFit { residual_rms: f64, bound: f64 },

    #[error("unsupported audio format: {0}")]
    Format(String),

    #[error(transparent)]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_)
            | Error::Overmodulation { .. }
            | Error::Aliasing { .. }
            | Error::InsufficientDuration { .. }
            | Error::DegenerateNullSpace { .. } => ErrorClass::Precondition,
            Error::SteadyStateResidual { .. }
            | Error::TraceDrift { .. }
            | Error::Positivity { .. }
            | Error::NoEdge
            | Error::PoorFit { .. } => ErrorClass::Numerical,
            Error::Format(_) | Error::Wav(_) | Error::Csv(_) | Error::Io(_) => ErrorClass::Io,
        }
    }
}
