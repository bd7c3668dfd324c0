//! Weights and operator families `A(x, z) = w(x) (M(x)z·z)^{(p−2)/2} M(x)z`,
//! with numerical checks of the structure axioms and of weight doubling.

mod axioms;
mod doubling;
pub(crate) mod operator;
mod weight;

pub use axioms::{axiom_sampler, Axiom, AxiomReport, AxiomViolation};
pub use doubling::{measure_doubling, BallSample, WeightDiagnostics};
pub use operator::{Anisotropy, Operator, OperatorDescriptor};
pub use weight::{Weight, WeightDescriptor};

use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("exponent p = {0} must satisfy 1 < p < ∞")]
    InvalidExponent(f64),
    #[error("weight with negative exponent {mu} evaluated at its singular point {at:?}")]
    SingularEvaluation { mu: f64, at: Point },
    #[error("weight depends on the distance to Γ but no Γ was supplied")]
    MissingGamma,
    #[error("anisotropy {0}")]
    InvalidAnisotropy(String),
    #[error("no interior ball of radius {radius} with its double inside the domain")]
    NoInteriorBall { radius: f64 },
    #[error("sample count must be at least 1")]
    NoSamples,
}

pub(crate) fn check_exponent(p: f64) -> Result<(), OperatorError> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(OperatorError::InvalidExponent(p))
    }
}
