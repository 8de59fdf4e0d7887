use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("truncation too small: half-width {got}, need at least {min}")]
    TruncationTooSmall { got: usize, min: usize },
    #[error("invalid coin: {0}")]
    InvalidCoin(String),
    #[error("degenerate coin: |gamma| = {0}")]
    DegenerateCoin(f64),
    #[error("horizon exceeded: requested {requested} steps, exact up to {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },
    #[error("truncation boundary reached at step {step}; amplitudes beyond this point are not exact")]
    Contaminated { step: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("spectral data requested for a truncated model")]
    TruncatedModel,
    #[error("pole: {0}")]
    Pole(String),
    #[error("not Schur class: |c0| = {0}")]
    NotSchurClass(f64),
    #[error("index {index} out of range (available {available})")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("winding undefined: boundary sample of modulus {min_modulus:e}")]
    WindingUndefined { min_modulus: f64 },
    #[error("not rational inner: {0}")]
    NotRationalInner(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("memory budget exceeded: need {required} bytes, budget {budget} bytes")]
    MemoryBudget { required: u64, budget: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
