//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: requested tol {tol:e}, achieved {achieved:e}")]
    QuadratureNotConverged { tol: f64, achieved: f64 },

    #[error("supplied modes are not mutually orthogonal: |<{a}|{b}>| = {overlap:e}")]
    NonOrthogonalBasis { a: String, b: String, overlap: f64 },

    #[error("cavity is geometrically unstable: |(A+D)/2| = {half_trace}")]
    UnstableCavity { half_trace: f64 },

    #[error("loss minimum not bracketed on [{lo:e}, {hi:e}] m")]
    NoBracket { lo: f64, hi: f64 },

    #[error("rejection sampler stalled: acceptance rate {rate:e}")]
    RejectionStall { rate: f64 },

    #[error("ramp never crossed the detection threshold")]
    NeverDetected,

    #[error("scenario config invalid: {field}: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("cannot parse quantity {input:?}: {reason}")]
    UnitParse { input: String, reason: String },

    #[error("golden mismatch:\n{report}")]
    GoldenMismatch { report: String },

    #[error("malformed trace CSV: {0}")]
    CsvFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// CLI exit code convention: 2 config, 3 numerics, 4 golden mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid { .. } | Error::UnitParse { .. } => 2,
            Error::QuadratureNotConverged { .. }
            | Error::NoBracket { .. }
            | Error::RejectionStall { .. }
            | Error::UnstableCavity { .. }
            | Error::NeverDetected => 3,
            Error::GoldenMismatch { .. } => 4,
            _ => 1,
        }
    }
}
