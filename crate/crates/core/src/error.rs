use thiserror::Error;

use crate::expr::{DerivError, EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Deriv(#[from] DerivError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("CFL violated: dt = {dt} exceeds the monotone bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("non-finite value at step {step}, node {node} (x = {x})")]
    NonFinite { step: usize, node: usize, x: f64 },
    #[error("path {path} produced a non-finite value at step {step}")]
    PathNonFinite { path: usize, step: usize },
    #[error("query ({t}, {x}) outside the solution range")]
    OutOfRange { t: f64, x: f64 },
    #[error("{what} did not converge: last defect {defect:e} at horizon {horizon}")]
    NoConvergence {
        what: &'static str,
        defect: f64,
        horizon: f64,
    },
    #[error("G is degenerate (sigma_lo_sq = {sigma_lo_sq}); ergodic computations need sigma_lo_sq > 0")]
    Degenerate { sigma_lo_sq: f64 },
    #[error("dissipativity not detected (eta estimate {eta:e}); enable allow-non-dissipative to proceed")]
    NotDissipative { eta: f64 },
    #[error("boundary node {node} has outward drift; the scheme is not monotone there")]
    NonMonotone { node: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("quadrature did not converge on [{a}, {b}] (estimated error {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
