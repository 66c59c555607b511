use alloc::string::String;

use thiserror::Error;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("distance matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("not a metric: {0}")]
    InvalidMetric(String),

    #[error("function value at the base point is {0}, expected 0")]
    BaseValue(f64),

    #[error("Lipschitz bound {bound} violated by pair ({i}, {j}) with quotient {quotient}")]
    LipschitzBound {
        i: usize,
        j: usize,
        quotient: f64,
        bound: f64,
    },

    #[error("no feasible exponent above {alpha} for step n = {n}")]
    Infeasible { alpha: f64, n: usize },

    #[error("norm of `{what}` is {value}, exceeds 1")]
    NormExceeded { what: &'static str, value: f64 },

    #[error("`{what}` is nonzero at site {site} outside the ideal support")]
    OutsideSupport { what: &'static str, site: usize },

    #[error("density oracle contract violated at call {call}: {detail}")]
    OracleContract { call: usize, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
