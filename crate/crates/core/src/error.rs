use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigensolver did not converge within {0} sweeps")]
    NumericalFailure(usize),
    #[error("matrix exponential overflow: largest eigenvalue {0} exceeds the safe range")]
    Overflow(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPositive(f64),
    #[error("matrix is not Hermitian (deviation {0:e} at ({1}, {2}))")]
    NotHermitian(f64, usize, usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operands belong to different models")]
    ModelMismatch,
    #[error("observable has outcomes without values")]
    NoValues,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("matrix is not a projection (residual {0:e})")]
    NotAProjection(f64),
    #[error("projection family is not pairwise orthogonal (residual {0:e})")]
    NotOrthogonal(f64),
    #[error("target {0} is outside [0, 1]")]
    InvalidTarget(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("objective is not compatible with the model: {0}")]
    IncompatibleObjective(String),
}
