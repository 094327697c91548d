use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot parse real number {0:?}")]
    Parse(String),

    #[error("precision {bits} bits is too small for orbits of length {n_max} (need at least {required})")]
    PrecisionBudget { bits: u32, n_max: u64, required: u32 },

    #[error("integer overflow in exact lattice arithmetic")]
    Overflow,

    #[error("spanning vectors are singular to working precision")]
    SingularBasis,

    #[error("boundary ambiguity: {0}")]
    BoundaryAmbiguity(String),

    #[error("degenerate cone coefficient: {0}")]
    DegenerateCoefficient(String),

    #[error("basis does not satisfy the construction preconditions: {0}")]
    Precondition(String),

    #[error("two integer shifts place the point in the region: {0}")]
    InjectivityViolation(String),

    #[error("no return to the region within {cap} steps of n = {from}")]
    NonReturning { from: i64, cap: u64 },

    #[error("hyperplane H_{k} meets the cylinder in {count} lattice points")]
    CardinalityViolation { k: i64, count: usize },

    #[error("tail column {tail:?} has no selected points in the requested range")]
    EmptyColumn { tail: Vec<i64> },

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by finite working precision rather than bad input.
    pub fn is_precision_failure(&self) -> bool {
        matches!(
            self,
            Error::PrecisionBudget { .. }
                | Error::SingularBasis
                | Error::BoundaryAmbiguity(_)
                | Error::DegenerateCoefficient(_)
                | Error::NonReturning { .. }
                | Error::Overflow
        )
    }

    /// Errors that witness a failed geometric or dynamical property.
    pub fn is_verification_failure(&self) -> bool {
        matches!(
            self,
            Error::VerificationFailure(_) | Error::InjectivityViolation(_) | Error::CardinalityViolation { .. }
        )
    }
}
