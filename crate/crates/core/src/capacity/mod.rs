//! Condenser capacities `cap_{p,w}(K, O)` by constrained energy minimization,
//! capacity-density ratios and sampled fatness estimates.

mod cdc;
mod condenser;

pub use cdc::{cdc_ratio, estimate_gamma, CdcReport, CdcSample, CdcSettings};
pub use condenser::{capacity, element_gap, CapacityResult};

use thiserror::Error;

use crate::geometry::{GeometryError, Point};
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("condenser plate is empty")]
    EmptyPlate,
    #[error("condenser plate touches the container boundary at node {0}")]
    PlateTouchesBoundary(usize),
    #[error("only {hops} element layers separate the plate from the container boundary (need at least 2)")]
    UnresolvedGap { hops: usize },
    #[error("no ambient node of the closed ball around {xi:?} with radius {radius} lies outside the domain")]
    EmptyComplement { xi: Point, radius: f64 },
    #[error("need at least one scale and one center")]
    EmptySample,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
