use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "unsupported dimension {0}: only single- and two-qubit objects (dim 2 or 4) are modelled"
    )]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix has trace {0}, expected 1")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector has norm {0}, expected 1")]
    NotNormalized(f64),

    #[error("invalid Kraus set: {0}")]
    InvalidChannel(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid subsystem index {0}; expected 0 (ion) or 1 (photon)")]
    InvalidSubsystem(usize),

    #[error("integration did not converge (estimated error {0:e})")]
    IntegrationNonConvergence(f64),

    #[error(
        "MLE did not converge after {iterations} iterations (gradient norm {gradient_norm:e})"
    )]
    MleNonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    #[error("missing measurement settings: {0}")]
    MissingSettings(String),

    #[error("record is degenerate: {0}")]
    DegenerateRecord(String),

    #[error("pump schedule: {0}")]
    PumpPlan(String),

    #[error("Stark pulse schedule: {0}")]
    StarkSchedule(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("configuration invalid:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for bad configuration, 3 for numerical
    /// non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::StarkSchedule(_)
            | Error::PumpPlan(_) => 2,
            Error::IntegrationNonConvergence(_)
            | Error::MleNonConvergence { .. }
            | Error::FitNonConvergence(_) => 3,
            _ => 1,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
