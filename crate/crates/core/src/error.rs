use thiserror::Error;

/// Errors raised by the operator algebra, model builders, solvers and integrator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: at least 2 required")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid rate {0}: rates must be nonnegative")]
    InvalidRate(f64),

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure in {context} (residual estimate {residual:.3e})")]
    NumericalFailure { context: String, residual: f64 },

    #[error("no zero eigenvalue within tolerance (smallest |λ| = {0:.3e})")]
    NoSteadyState(f64),

    #[error("ambiguous steady state: {0} eigenvalues within tolerance of zero")]
    AmbiguousSteadyState(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("stiff failure at s = {s:.6}: step size {step:.3e} underflowed; try a smaller coupling or the implicit fallback")]
    StiffFailure { s: f64, step: f64 },

    #[error("integration invalid at s = {s:.6}: trace drift {drift:.3e}")]
    IntegrationInvalid { s: f64, drift: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
