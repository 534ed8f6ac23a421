//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("quadrature did not reach the requested accuracy (estimated defect {defect:.3e})")]
    IntegrationAccuracy { defect: f64 },

    #[error("history does not cover [{from}, {to}]")]
    InsufficientHistory { from: f64, to: f64 },

    #[error("state component {component} left the domain at t = {time}")]
    DomainExit { component: usize, time: f64 },

    #[error("step size underflow at t = {t} (stiffness or accuracy failure)")]
    StepSizeUnderflow { t: f64 },

    #[error("maximum number of accepted steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("nonlinearity evaluation failed at {point:?}: {reason}")]
    EvalFailure { point: Vec<f64>, reason: String },

    #[error("equilibrium search did not converge within {0} iterations")]
    EquilibriumNotFound(usize),

    #[error("equilibrium {0:?} lies outside the domain")]
    EquilibriumOutsideDomain(Vec<f64>),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("model not supported for certification: {0}")]
    UnsupportedModel(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
