use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::LatticePoint;

/// Errors raised by the divisor calculus, the refactorization engine and the flows.
///
/// Failures of the genericity assumptions are numerical stand-ins for "the input
/// lies on the exceptional Zariski-closed set"; they are reported, never repaired.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("leading coefficient is singular (|det A_0| = {det_abs:.3e})")]
    SingularLeading { det_abs: f64 },

    #[error("genericity violation: {0}")]
    Genericity(String),

    #[error("{value} is not an eigenvalue of the polynomial (relative smallest singular value {ratio:.3e})")]
    RootMismatch { value: Complex64, ratio: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("internal inconsistency: {what} residual {residual:.3e}")]
    Inconsistent { what: String, residual: f64 },

    #[error("flow aborted at lattice point {point}: {source}")]
    FlowAbort {
        point: LatticePoint,
        #[source]
        source: Box<Error>,
    },

    #[error("integration failed at parameter {at:.6}: {reason}")]
    Integration { at: f64, reason: String },
}

impl Error {
    pub(crate) fn genericity(msg: impl Into<String>) -> Self {
        Error::Genericity(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Wraps the error with the lattice point at which a trajectory stopped.
    pub fn at(self, point: &LatticePoint) -> Self {
        match self {
            e @ Error::FlowAbort { .. } => e,
            other => Error::FlowAbort {
                point: point.clone(),
                source: Box::new(other),
            },
        }
    }

    /// True when the root cause is a genericity violation (possibly wrapped).
    pub fn is_genericity(&self) -> bool {
        match self {
            Error::Genericity(_) | Error::RootMismatch { .. } => true,
            Error::FlowAbort { source, .. } => source.is_genericity(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
