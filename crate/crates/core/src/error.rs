use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not symmetric positive definite: {0}")]
    InvalidMetric(String),
    #[error("tensor symmetry violated: {0}")]
    SymmetryError(String),
    #[error("frame is not orthonormal: {0}")]
    FrameError(String),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("missing bundle field: {0}")]
    MissingField(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("Weyl tensor too small for nondegenerate mode: {0}")]
    DegenerateWeyl(String),
    #[error("operator is degenerate: {0}")]
    DegenerateOperator(String),
    #[error("conformal factor must be positive: {0}")]
    InvalidConformalFactor(String),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),
    #[error("contract violated: {0}")]
    ContractError(String),
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("operator has no underlying metric")]
    NotGeometric,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
