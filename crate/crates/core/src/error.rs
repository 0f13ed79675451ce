use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid register: {0}")]
    InvalidRegister(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("total dimension {dim} exceeds the budget of {budget}")]
    DimensionBudgetExceeded { dim: usize, budget: usize },
    #[error("cannot trace out every site of the register")]
    TracedAllSites,
    #[error("invalid site set: {0}")]
    InvalidSites(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("filter annihilates the state (success probability {0:.3e})")]
    ZeroSuccessProbability(f64),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("amplitude normalization impossible: 1 - D b^2 = {0}")]
    InvalidAmplitude(f64),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("expected a two-qubit state")]
    NotTwoQubits,
    #[error("scenario with {0} parties exceeds the supported maximum of 6")]
    ScenarioTooLarge(usize),
    #[error("{0} sites exceeds the supported maximum for subset enumeration")]
    TooManySites(usize),
    #[error("Bell operator has zero norm")]
    ZeroOperator,
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid functional: {0}")]
    InvalidFunctional(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("certificate failed verification: {0}")]
    Certificate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
