use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeightError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("containment violated: {0}")]
    Containment(String),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("not nilpotent or not compatible: {0}")]
    InvalidNilpotent(String),
    #[error("relative monodromy filtration does not exist: {0}")]
    NonExistence(String),
    #[error("no graded splitting satisfies the constraints: {0}")]
    NotFound(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("polarization pairing is negative: {0}")]
    NegativePairing(String),
    #[error("missing polarization for weight {0}")]
    MissingPolarization(i64),
    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),
    #[error("mixed Hodge structure axiom fails: {0}")]
    MhsAxiomViolation(String),
    #[error("splitting did not reach tolerance: {0}")]
    NonConvergence(String),
    #[error("Hodge metric is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("zeta coefficient table has no entry for {0}")]
    CoefficientTableMissing(String),
    #[error("no lift exists: {0}")]
    NoLift(String),
    #[error("incompatible shapes: {0}")]
    Incompatible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid experiment: {0}")]
    Experiment(String),
    #[error("{0}")]
    Io(String),
}

impl HeightError {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            HeightError::Parse(_) => 2,
            HeightError::NonExistence(_) => 3,
            HeightError::NegativePairing(_) => 4,
            HeightError::NonConvergence(_) | HeightError::NotPositiveDefinite(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T, E = HeightError> = std::result::Result<T, E>;
