use thiserror::Error;

use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {field} {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("trace is {trace}, expected 1 (tolerance {tol:e})")]
    Trace { trace: f64, tol: f64 },

    #[error("state is not physical: {0}")]
    NotPhysical(String),

    #[error("singular system: eigenvalue {eigenvalue} of magnitude {:e}", eigenvalue.norm())]
    Singular { eigenvalue: C64 },

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("non-finite value at t = {t} in {context}")]
    NonFinite { t: f64, context: &'static str },

    #[error("trace drifted by {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("near-zero denominator {value:e} in {context}")]
    NearZero { value: f64, context: &'static str },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    /// Short stable identifier used in sweep failure records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParam { .. } => "invalid-param",
            Error::Trace { .. } => "trace",
            Error::NotPhysical(_) => "not-physical",
            Error::Singular { .. } => "singular",
            Error::EigenSolver => "eigen-solver",
            Error::NonFinite { .. } => "non-finite",
            Error::TraceDrift { .. } => "trace-drift",
            Error::NearZero { .. } => "near-zero",
        }
    }

    /// `true` for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParam { .. })
    }
}
