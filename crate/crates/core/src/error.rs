use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmotError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("support size mismatch: expected {expected} atoms, found {found}")]
    SupportSizeMismatch { expected: usize, found: usize },

    #[error("empirical measure has no atoms")]
    EmptyMeasure,

    #[error("non-finite coordinate in marginal {marginal}, atom {atom}")]
    NonFiniteCoordinate { marginal: usize, atom: usize },

    #[error("an instance needs at least 2 marginals, found {0}")]
    TooFewMarginals(usize),

    #[error("header field {field} = {declared} disagrees with the data ({actual})")]
    HeaderMismatch {
        field: &'static str,
        declared: usize,
        actual: usize,
    },

    #[error("cost tensor would need {entries} entries, cap is {cap}")]
    SizeOverflow { entries: u128, cap: usize },

    #[error("enumeration of {count} Monge assignments exceeds cap {cap}")]
    EnumerationOverflow { count: u128, cap: usize },

    #[error("transport polytope is infeasible: {0}")]
    Infeasible(String),

    #[error("simplex stopped after {0} iterations without reaching optimality")]
    IterationLimit(usize),

    #[error("dual certificate failed verification: {0}")]
    CertificateInvalid(String),

    #[error("two-point construction requires m = 2, found m = {0}")]
    NotTwoPoint(usize),

    #[error("monotone assignment requires d = 1, found d = {0}")]
    NotOneDimensional(usize),

    #[error("coupling is not feasible for the instance (max violation {0:e})")]
    InfeasibleCoupling(f64),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl MmotError {
    /// True for errors caused by the caller's input rather than by the solver.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            MmotError::Infeasible(_)
                | MmotError::IterationLimit(_)
                | MmotError::CertificateInvalid(_)
        )
    }
}

pub type Result<T, E = MmotError> = std::result::Result<T, E>;
