use thiserror::Error;

use crate::formula::Gen;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("formula uses generator {0:?} but it was not supplied")]
    MissingGenerator(Gen),

    #[error("order mismatch: scheme expects source order {expected}, formula claims {found}")]
    OrderMismatch { expected: u32, found: u32 },

    #[error("{scheme} cannot be applied to a formula of order {order}: {reason}")]
    Parity {
        scheme: &'static str,
        order: u32,
        reason: &'static str,
    },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("degenerate scan: all errors below {threshold:e}")]
    DegenerateScan { threshold: f64 },

    #[error("no r <= {cap} reaches the requested accuracy")]
    BudgetExceeded { cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numeric procedure (as opposed to bad input).
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure(_) | Error::DegenerateScan { .. } | Error::BudgetExceeded { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
