use serde::Serialize;

use super::{BarrierError, Breach, ProbeRecord};
use crate::geometry::{dist, Point};
use crate::solver::{solve_dirichlet, FeModel, SolverSettings};

/// Radial cutoff: 1/4 on the half ball, 1 outside the ball, linear between.
#[inline]
pub fn eta(r: f64, radius: f64) -> f64 {
    (0.25 + 1.5 * (r / radius - 0.5)).clamp(0.25, 1.0)
}

/// Solution of one auxiliary ball problem, stored on the nodes of the open
/// ball; every other node has value 1.
#[derive(Clone, Debug, Serialize)]
pub struct AuxField {
    pub k: i32,
    pub center: Point,
    pub radius: f64,
    /// Source density `c₃ R^{−p}` relative to the weight.
    pub rho: f64,
    /// Sorted node indices inside the open ball.
    #[serde(skip)]
    pub nodes: Vec<usize>,
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Free (solved) nodes among `nodes`; the rest carry cutoff data.
    #[serde(skip)]
    pub free: Vec<bool>,
}

impl AuxField {
    #[inline]
    fn slot(&self, i: usize) -> Option<usize> {
        self.nodes.binary_search(&i).ok()
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.slot(i).map_or(1.0, |s| self.values[s])
    }

    #[inline]
    pub fn is_free(&self, i: usize) -> bool {
        self.slot(i).is_some_and(|s| self.free[s])
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut u = vec![1.0; n];
        for (&i, &v) in self.nodes.iter().zip(&self.values) {
            u[i] = v;
        }
        u
    }

    /// Measures the three bounds against `[1/4, 5/4]` and `1/2` on the closed θ-ball.
    pub fn probe(&self, nodes: &[Point], theta: f64) -> ProbeRecord {
        let covers_all = self.nodes.len() == nodes.len();
        let outside = if covers_all { None } else { Some(1.0) };
        let min = self.values.iter().copied().chain(outside).fold(f64::INFINITY, f64::min);
        let max = self.values.iter().copied().chain(outside).fold(f64::NEG_INFINITY, f64::max);
        let inner = theta * self.radius * (1.0 + 1e-12);
        let inner_max = self
            .nodes
            .iter()
            .zip(&self.values)
            .filter(|(&i, _)| dist(nodes[i], self.center) <= inner)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let breach = if min < 0.25 - 1e-8 {
            Some(Breach::Low)
        } else if max > 1.25 + 1e-8 {
            Some(Breach::High)
        } else if inner_max > 0.5 + 1e-8 {
            Some(Breach::Decay)
        } else {
            None
        };
        ProbeRecord { k: self.k, center: self.center, radius: self.radius, min, max, inner_max, breach }
    }
}

/// Solves `−div A(x, ∇u) = c₃ R^{−p} w` at interior nodes of `B(ξ, R)` with
/// `u = η_B` on the remaining nodes.
pub fn auxiliary_function(
    model: &FeModel,
    k: i32,
    center: Point,
    radius: f64,
    c3: f64,
    settings: &SolverSettings,
) -> Result<AuxField, BarrierError> {
    let mesh = model.mesh;
    if radius < 4.0 * mesh.h {
        return Err(BarrierError::Unresolved { radius, min: 4.0 * mesh.h });
    }
    let n = mesh.n_nodes();
    let r: Vec<f64> = mesh.nodes.iter().map(|&x| dist(x, center)).collect();
    let inside: Vec<bool> = r.iter().map(|&d| d < radius * (1.0 - 1e-12)).collect();
    let fixed: Vec<bool> = (0..n).map(|i| !inside[i] || mesh.boundary[i]).collect();
    let init: Vec<f64> = r.iter().map(|&d| eta(d, radius)).collect();
    let rho = c3 * radius.powf(-model.p);
    let sol = solve_dirichlet(model, &vec![rho; n], &fixed, init, settings)?;
    let nodes: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
    let values = nodes.iter().map(|&i| sol.u[i]).collect();
    let free = nodes.iter().map(|&i| !fixed[i]).collect();
    Ok(AuxField { k, center, radius, rho, nodes, values, free })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, GammaSelector};
    use crate::operators::Operator;

    #[test]
    fn cutoff_profile() {
        assert_eq!(eta(0.0, 1.0), 0.25);
        assert_eq!(eta(0.5, 1.0), 0.25);
        assert_eq!(eta(0.75, 1.0), 0.625);
        assert_eq!(eta(1.0, 1.0), 1.0);
        assert_eq!(eta(3.0, 1.0), 1.0);
    }

    #[test]
    fn half_plane_ball() {
        let spec = DomainSpec::unit_square().with_gamma(GammaSelector::Edges(vec![0]));
        let m = build_mesh(&spec, 1.0 / 32.0).unwrap();
        let model = FeModel::new(&m, &Operator::p_laplacian(2.0).unwrap()).unwrap();
        let u = auxiliary_function(&model, 0, [0.5, 0.0], 0.4, 0.1, &SolverSettings::default()).unwrap();
        let dense = u.to_dense(m.n_nodes());
        for (i, &x) in m.nodes.iter().enumerate() {
            if dist(x, [0.5, 0.0]) >= 0.4 {
                assert_eq!(dense[i], 1.0);
            }
        }
        let rec = u.probe(&m.nodes, 0.125);
        assert!(rec.min >= 0.25 - 1e-8 && rec.max <= 1.25 + 1e-8);
        assert_eq!(rec.breach, None, "{rec:?}");
        assert!(matches!(
            auxiliary_function(&model, 0, [0.5, 0.0], 0.1, 0.1, &SolverSettings::default()),
            Err(BarrierError::Unresolved { .. })
        ));
        let zero = auxiliary_function(&model, 0, [0.5, 0.0], 0.4, 0.0, &SolverSettings::default()).unwrap();
        assert!(zero.values.iter().all(|&v| (0.25 - 1e-12..=1.0 + 1e-12).contains(&v)));
    }
}
