use crate::geometry::{Mesh, Point};
use crate::operators::operator::{flux, Mat2};
use crate::operators::Operator;

use super::SolverError;

/// Per-cell operator data (barycenter quadrature) and lumped nodal w-masses.
#[derive(Clone, Debug)]
pub struct FeModel<'m> {
    pub mesh: &'m Mesh,
    pub p: f64,
    pub cell_weight: Vec<f64>,
    pub cell_matrix: Vec<Mat2>,
    /// `m_i = ∫ φ_i dw`, lumped.
    pub mass: Vec<f64>,
}

impl<'m> FeModel<'m> {
    pub fn new(mesh: &'m Mesh, op: &Operator) -> Result<Self, SolverError> {
        let mut cell_weight = Vec::with_capacity(mesh.n_cells());
        let mut cell_matrix = Vec::with_capacity(mesh.n_cells());
        let mut mass = vec![0.0; mesh.n_nodes()];
        let share = 1.0 / (mesh.dim + 1) as f64;
        for (t, g) in mesh.geometry.iter().enumerate() {
            let w = op.weight.eval(g.barycenter)?;
            cell_weight.push(w);
            cell_matrix.push(op.anisotropy.matrix(g.barycenter));
            for &v in mesh.cell(t) {
                mass[v] += share * w * g.measure;
            }
        }
        Ok(Self { mesh, p: op.p, cell_weight, cell_matrix, mass })
    }

    /// Same mesh and weights with a different exponent.
    pub fn with_exponent(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }

    #[inline]
    pub fn grad(&self, t: usize, u: &[f64]) -> Point {
        let g = &self.mesh.geometry[t];
        let mut z = [0.0, 0.0];
        for (k, &v) in self.mesh.cell(t).iter().enumerate() {
            z[0] += u[v] * g.grads[k][0];
            z[1] += u[v] * g.grads[k][1];
        }
        z
    }

    /// `A(x_T, z)` for cell `t`.
    #[inline]
    pub fn flux(&self, t: usize, z: Point) -> Point {
        flux(self.p, self.cell_weight[t], &self.cell_matrix[t], z)
    }

    /// `Σ_T w_T (M∇u·∇u)^{p/2} |T|` over all cells.
    pub fn p_energy(&self, u: &[f64]) -> f64 {
        (0..self.mesh.n_cells())
            .map(|t| self.cell_p_energy(t, u))
            .sum()
    }

    #[inline]
    pub fn cell_p_energy(&self, t: usize, u: &[f64]) -> f64 {
        let z = self.grad(t, u);
        let m = &self.cell_matrix[t];
        let q = z[0] * (m[0][0] * z[0] + m[0][1] * z[1]) + z[1] * (m[1][0] * z[0] + m[1][1] * z[1]);
        self.cell_weight[t] * q.max(0.0).powf(0.5 * self.p) * self.mesh.geometry[t].measure
    }
}
