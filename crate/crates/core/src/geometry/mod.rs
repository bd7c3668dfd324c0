//! Domains, meshes, distance fields and the multi-scale ladder of boundary
//! coverings.
//!
//! Everything here works on planar points; one-dimensional domains embed in
//! the `x` axis with `y = 0`.

mod delaunay;
mod distance;
mod domain;
mod ladder;
pub(crate) mod mesh;

pub use distance::{distance_field, point_segment_distance, DistanceField, GammaSet};
pub use domain::{DomainKind, DomainSpec, GammaSelector, Region};
pub use ladder::{build_ladder, greedy_net, Scale, ScaleLadder};
pub use mesh::{build_mesh, BoundaryFacet, CellGeometry, Mesh};

use thiserror::Error;

/// A point in the plane. 1D meshes use `[x, 0.0]`.
pub type Point = [f64; 2];

/// A closed straight segment; degenerate segments (`a == b`) are points.
pub type Segment = [Point; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("gamma selector refers to edge {index} but the boundary has {count} edges")]
    GammaOutOfRange { index: usize, count: usize },
    #[error("gamma selection is empty")]
    EmptyGamma,
    #[error("mesh size h = {h} is invalid: {reason}")]
    InvalidMeshSize { h: f64, reason: String },
    #[error("meshing failed: {0}")]
    MeshingFailure(String),
    #[error("theta = {0} must lie in (0, 1)")]
    ThetaOutOfRange(f64),
    #[error("reference radius {0} must be positive and finite")]
    InvalidReference(f64),
    #[error("no resolvable scales: the largest radius {largest} is below 4h = {min}")]
    NoResolvableScales { largest: f64, min: f64 },
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}
