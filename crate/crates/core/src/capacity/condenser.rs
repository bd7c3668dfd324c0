use std::collections::VecDeque;

use serde::Serialize;

use super::CapacityError;
use crate::geometry::Mesh;
use crate::solver::{solve_dirichlet, FeModel, SolverSettings};

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    /// Minimal number of mesh edges between the plate and the boundary.
    pub gap: usize,
    #[serde(skip)]
    pub potential: Vec<f64>,
}

/// Number of mesh edges on a shortest path from a plate node to a boundary node.
pub fn element_gap(mesh: &Mesh, plate: &[bool]) -> usize {
    let adj = mesh.neighbors();
    let mut hops = vec![usize::MAX; mesh.n_nodes()];
    let mut q = VecDeque::new();
    for (i, &k) in plate.iter().enumerate() {
        if k {
            hops[i] = 0;
            q.push_back(i);
        }
    }
    while let Some(v) = q.pop_front() {
        if mesh.boundary[v] {
            return hops[v];
        }
        for &w in &adj[v] {
            if hops[w] == usize::MAX {
                hops[w] = hops[v] + 1;
                q.push_back(w);
            }
        }
    }
    usize::MAX
}

/// Discrete `cap_{p,w}(K, O)` with `O` the meshed domain and `K` the plate
/// nodes: minimum of `Σ_T w_T |∇u|^p |T|` over fields with `u = 1` on `K`
/// and `u = 0` on `∂O`. A model with a matrix field measures `M∇u·∇u`
/// instead of `|∇u|²`.
pub fn capacity(
    model: &FeModel,
    plate: &[bool],
    settings: &SolverSettings,
) -> Result<CapacityResult, CapacityError> {
    let mesh = model.mesh;
    if !plate.iter().any(|&k| k) {
        return Err(CapacityError::EmptyPlate);
    }
    if let Some(i) = (0..mesh.n_nodes()).find(|&i| plate[i] && mesh.boundary[i]) {
        return Err(CapacityError::PlateTouchesBoundary(i));
    }
    let gap = element_gap(mesh, plate);
    if gap < 2 {
        return Err(CapacityError::UnresolvedGap { hops: gap });
    }
    let n = mesh.n_nodes();
    let fixed: Vec<bool> = (0..n).map(|i| plate[i] || mesh.boundary[i]).collect();
    let init: Vec<f64> = plate.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
    let sol = solve_dirichlet(model, &vec![0.0; n], &fixed, init, settings)?;
    let capacity = model.p_energy(&sol.u);
    Ok(CapacityResult { capacity, gap, potential: sol.u })
}
