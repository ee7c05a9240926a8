use thiserror::Error;

/// Errors raised by the workbench library.
#[derive(Debug, Error)]
pub enum HfcError {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("register of {0} qubits exceeds the supported maximum of 64")]
    TooManyQubits(usize),

    #[error("excitation indices violate the required ordering: {0}")]
    IndexOrder(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("expected {expected} circuit parameters, got {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "confusion matrix is ill-conditioned (condition number {condition:.3e}); \
         rebuild it with more calibration shots"
    )]
    IllConditioned { condition: f64 },

    #[error("post-selection retained no probability mass")]
    NothingRetained,

    #[error("RDM trace {trace:.3e} is too small to purify")]
    DegenerateTrace { trace: f64 },

    #[error("matrix is not antisymmetric (max |K + K^T| = {deviation:.3e})")]
    NotAntisymmetric { deviation: f64 },

    #[error("optimizer failed after {iterations} iterations: {reason}")]
    Optimizer { iterations: usize, reason: String },

    #[error("unknown molecule '{0}'")]
    UnknownMolecule(String),

    #[error("unknown nucleus '{nucleus}' for molecule '{molecule}'")]
    UnknownNucleus { molecule: String, nucleus: String },

    #[error("dataset self-check failed for '{molecule}': {reason}")]
    SelfCheck { molecule: String, reason: String },

    #[error("all {runs} runs were rejected by the RDM filter")]
    AllRunsRejected { runs: usize },

    #[error("missing measurement result for setting '{0}'")]
    MissingMeasurement(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HfcError>;
