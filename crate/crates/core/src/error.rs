use thiserror::Error;

pub type Result<T> = std::result::Result<T, QvtError>;

#[derive(Debug, Error)]
pub enum QvtError {
    #[error("input vector is empty")]
    EmptyInput,
    #[error("all-zero generator cannot be normalised")]
    ZeroVector,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("register `{0}` not found in layout")]
    RegisterNotFound(String),
    #[error("register layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("qubit budget exceeded: {requested} qubits requested, limit is {limit}")]
    QubitBudget { requested: usize, limit: usize },
    #[error("measurement outcome has probability {probability:.3e}")]
    ZeroProbability { probability: f64 },
    #[error("phase register would wrap: t*lambda_max/(2 pi) = {ratio:.4} must stay below 1/2")]
    WrapViolation { ratio: f64 },
    #[error("{required} precision qubits required for kappa={kappa:.3} and epsilon={epsilon}, {available} configured")]
    InsufficientPrecision {
        required: usize,
        available: usize,
        kappa: f64,
        epsilon: f64,
    },
    #[error("generator must be nonnegative and sum to one for oracle access")]
    NotNormalized,
    #[error("patch [{start}, {end}) exceeds frame of length {len}")]
    PatchOutOfBounds { start: i64, end: i64, len: usize },
    #[error("label dominance y_i <= y~_i violated at index {index} ({y:.3e} > {y_tilde:.3e})")]
    DominanceViolation { index: usize, y: f64, y_tilde: f64 },
    #[error("truncated series requested at |v| = {0}, outside the convergence margin")]
    SeriesDivergence(f64),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl QvtError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QvtError::InvalidParameter(msg.into())
    }
}
