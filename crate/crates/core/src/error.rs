use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {z} lies outside the admissible domain: {reason}")]
    Domain { z: Complex64, reason: &'static str },

    #[error("vanishing denominator at z = {z}, t = {t}")]
    Singularity { z: Complex64, t: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },

    #[error("series error: {0}")]
    Series(String),

    #[error("quadratic differential vanishes at {z}")]
    ZeroDivisor { z: Complex64 },

    #[error("branch point hit at {z}")]
    Branch { z: Complex64 },

    #[error("tail bound {bound:e} exceeds requested tolerance {tol:e}")]
    Truncation { bound: f64, tol: f64 },

    #[error("evaluation failed at {z}: {reason}")]
    Evaluation { z: Complex64, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("dilatation bound k = {k} must lie in (0, 1)")))
    }
}
