use thiserror::Error;

use crate::expr::ParseError;
use crate::scalar::DomainError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("numerical domain error: {0}")]
    Domain(#[from] DomainError),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("spec file line {line}: {message}")]
    SpecFile { line: usize, message: String },
    #[error("point not admissible: {0}")]
    Inadmissible(String),
    #[error("no admissible points found after {attempts} attempts")]
    NoAdmissiblePoints { attempts: usize },
    #[error("indices must be pairwise distinct, got {0:?}")]
    Index(Vec<usize>),
    #[error("exponent {0} is not an integer; exact mode needs 2m ∈ ℤ")]
    NonIntegralExponent(String),
    #[error("elimination pivot vanishes at the sample point (coefficient of F'_{0})")]
    PivotZero(usize),
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),
    #[error("trace constraint violated: w1+w2+w3 = {0:e}")]
    TraceViolation(f64),
    #[error("could not draw distinct coordinates after {0} retries")]
    RetriesExhausted(usize),
}

impl Error {
    /// Errors caused by numerics at a point, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Inadmissible(_)
                | Error::NoAdmissiblePoints { .. }
                | Error::PivotZero(_)
                | Error::RetriesExhausted(_)
                | Error::TraceViolation(_)
        )
    }
}
