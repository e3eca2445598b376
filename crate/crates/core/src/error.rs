use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Points carried as witnesses are converted to `f64` so the error type
/// stays independent of the scalar parameter.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("pair (A, B) is not stabilizable{}", fmt_witness(.witness))]
    NotStabilizable {
        reason: String,
        witness: Option<Vec<f64>>,
    },

    #[error("no offset schedule separates the piece values at {point:?}")]
    OffsetSelection { point: Vec<f64> },

    #[error("point {point:?} is outside the closure of every region")]
    Uncovered { point: Vec<f64> },

    #[error("controller failed at sample {xi:?}: {reason}")]
    Controller { xi: Vec<f64>, reason: String },

    #[error("no certified sampling step after {halvings} halvings from {xi:?}")]
    NoCertifiedStep {
        xi: Vec<f64>,
        halvings: usize,
        trace: Vec<(f64, String)>,
    },

    #[error("parse error at column {pos}: {message}")]
    Parse { pos: usize, message: String },
}

fn fmt_witness(w: &Option<Vec<f64>>) -> String {
    match w {
        Some(p) => format!(" at {p:?}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }

    /// Attaches a witness point to a not-stabilizable error.
    pub fn with_witness(self, point: Vec<f64>) -> Self {
        match self {
            Error::NotStabilizable { reason, .. } => Error::NotStabilizable {
                reason,
                witness: Some(point),
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
