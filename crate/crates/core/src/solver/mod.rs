//! Discrete Dirichlet problems for `−div A(x, ∇u) = ρ w` by energy
//! minimization, plus the weak-residual toolbox: discrete Riesz measures,
//! supersolution, glueing and comparison checks, and Harnack/oscillation
//! diagnostics.
//!
//! Fields are plain nodal vectors (`Vec<f64>` / `&[f64]`) indexed like the
//! mesh nodes.

mod diagnostics;
mod model;
mod newton;
mod residual;

pub use diagnostics::{harnack_diagnostic, oscillation_probe};
pub use model::FeModel;
pub use newton::{solve_dirichlet, IterRecord, Solution, SolverSettings};
pub use residual::{
    comparison_check, glue_min, glueing_check, node_residual, residual_measure,
    supersolution_check, supersolution_tolerance, Branch, DenseBranch, GlueReport,
    ResidualMeasure, SupersolutionReport,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::operators::OperatorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("linear solve failed: {0}")]
    Linalg(#[from] LinalgError),
    #[error("Newton iteration did not converge after {iterations} steps: residual {residual:e} > tolerance {tolerance:e}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
        history: Vec<f64>,
    },
    #[error("field has {found} values but the mesh has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("input {branch} is not a supersolution: node {node} falls short by {deficit:e}")]
    NotSupersolution { branch: usize, node: usize, deficit: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub(crate) fn check_len(expected: usize, v: &[f64]) -> Result<(), SolverError> {
    if v.len() != expected {
        return Err(SolverError::LengthMismatch { expected, found: v.len() });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(SolverError::NonFinite(i));
    }
    Ok(())
}
