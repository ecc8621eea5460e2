use std::fmt;

use crate::lattice::LatticePoint;

/// Errors raised by diagram construction and the numerical checks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-commuting input: residual {residual:e} at {at}")]
    NonCommuting { at: LatticePoint, residual: f64 },

    #[error("degenerate polar decomposition: P vanishes at {0}")]
    DegeneratePolar(LatticePoint),

    #[error("infeasible constant {constant}: {detail}")]
    InfeasibleConstant { constant: f64, detail: String },

    #[error("window too small: {0}")]
    Window(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// Two independent routes to the same verdict disagreed. This indicates a
    /// bug in the tool, never a mathematical outcome.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by the command-line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    InternalConsistency,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InternalConsistency(_) => ErrorClass::InternalConsistency,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => ErrorClass::Io,
            _ => ErrorClass::Domain,
        }
    }

    pub fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    pub fn internal(msg: impl fmt::Display) -> Self {
        Error::InternalConsistency(msg.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
