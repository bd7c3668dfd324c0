//! Strong barriers for weighted quasilinear elliptic operators of p-Laplace
//! type, together with the tools built on them: condenser capacities and
//! fatness estimates, Hardy inequality certificates, and Dirichlet problems
//! with boundary-singular sources.
//!
//! All computations run on P1 finite-element meshes of 1D intervals and 2D
//! polygons.

pub mod barrier;
pub mod capacity;
pub mod config;
pub mod geometry;
pub mod hardy;
pub mod linalg;
pub mod operators;
pub mod pipeline;
pub mod singular;
pub mod solver;
