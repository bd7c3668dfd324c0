//! Strong barrier construction.
//!
//! Auxiliary ball problems are solved on a ladder of radii `R_k = (θ/2)^k R_ref`,
//! combined into layer minima `v_k`, and assembled into
//! `s = min_k (3/4)^k ṽ_k`; the barrier is `s_Γ = 4s`. The decay scale θ
//! and the source level c₃ are calibrated on a fixed grid.

mod assemble;
mod auxiliary;
mod calibrate;
mod constants;
mod transform;
mod verify;

pub use assemble::{assemble_barrier, construct_barrier, layer_function, BarrierLadder, Layer, LayerBranch};
pub use auxiliary::{auxiliary_function, eta, AuxField};
pub use calibrate::{calibrate, solve_scale, BarrierSettings, Calibration};
pub use constants::{alpha_of, c_h_of, Breach, CalibratedConstants, CalibrationAttempt, ProbeRecord};
pub use transform::{transform_barrier, PowerTransform, TransformReport};
pub use verify::{verify_barrier, BandEnvelope, BarrierVerification, SandwichReport};

use thiserror::Error;

use crate::geometry::{GeometryError, Point};
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error("no (θ, c₃) pair of the calibration grid passed at every probe ({attempts} attempts)")]
    CalibrationFailure { attempts: usize },
    #[error("auxiliary function around {center:?} with radius {radius} breaches its bounds: {breach:?}")]
    Breach { center: Point, radius: f64, breach: Breach },
    #[error("radius {radius} is below the resolvable size 4h = {min}")]
    Unresolved { radius: f64, min: f64 },
    #[error("window reduction fails at node {node}: full minimum {full} differs from window minimum {window}")]
    WindowMismatch { node: usize, full: f64, window: f64 },
    #[error("exponent β = {beta} must lie in (0, α] with α = {alpha}")]
    BadExponent { beta: f64, alpha: f64 },
    #[error("amplitude K = {0} must be positive and finite")]
    BadAmplitude(f64),
    #[error("empty calibration grid")]
    EmptyGrid,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
