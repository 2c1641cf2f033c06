use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("state vector is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("qubit selection is empty")]
    EmptySelection,

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit index {0} selected more than once")]
    DuplicateQubit(usize),

    #[error("negative eigenvalue {0:e} in an operation that requires a physical state")]
    NegativeEigenvalue(f64),

    #[error("density matrix is not marked physical; project it first")]
    NotPhysical,

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing measurement setting {0}")]
    MissingSetting(String),

    #[error("duplicate measurement setting {0}")]
    DuplicateSetting(String),

    #[error("shot count mismatch: expected {expected}, got {actual}")]
    ShotMismatch { expected: f64, actual: f64 },

    #[error("Stokes table is incomplete: {0}")]
    IncompleteStokes(String),

    #[error("singular readout calibration on qubit {qubit} (determinant {det:e})")]
    SingularCalibration { qubit: usize, det: f64 },

    #[error("conditioning on the system qubit failed: both outcome probabilities vanish")]
    DegenerateConditioning,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than by
    /// the numerical pipeline.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidGate(_)
                | Error::QubitOutOfRange { .. }
                | Error::DuplicateQubit(_)
                | Error::EmptySelection
                | Error::Parse(_)
        )
    }
}
