//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("invalid IFS spec: {0}")]
    InvalidSpec(String),
    #[error("similarity dimension {d} exceeds ambient dimension {n}")]
    DimensionTooLarge { d: f64, n: usize },
    #[error("point budget exceeded: {requested} points requested, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("radius {radius} is below the sample resolution {resolution}")]
    RadiusBelowResolution { radius: f64, resolution: f64 },
    #[error("fit needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("all sampled pairs are coincident")]
    DegenerateMeasure,
    #[error("exponent u = {u} must be below d = {d}")]
    DivergentIntegral { u: f64, d: f64 },
    #[error("t = {t} does not exceed d = {d}; the bound is vacuous")]
    VacuousBound { t: f64, d: f64 },
    #[error("s values do not straddle a breakpoint: {0}")]
    NoStraddle(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("config error: {0}")]
    Config(String),
}

pub type FracResult<T> = Result<T, FracError>;
