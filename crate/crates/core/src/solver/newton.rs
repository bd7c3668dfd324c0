use serde::{Deserialize, Serialize};

use super::{check_len, FeModel, SolverError};
use crate::linalg::Envelope;
use crate::operators::operator::mat_vec;

/// Continuation and line-search parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// First regularization level ε in `(ε² + M∇u·∇u)^{p/2}`.
    pub eps_start: f64,
    /// Last regularization level before the unregularized stage.
    pub eps_end: f64,
    /// Geometric factor between consecutive ε.
    pub eps_factor: f64,
    /// Armijo sufficient-decrease parameter.
    pub armijo: f64,
    /// Step reduction factor in backtracking.
    pub backtrack: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_iterations: usize,
    /// Relative first-order optimality tolerance.
    pub tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            eps_start: 1e-2,
            eps_end: 1e-8,
            eps_factor: 0.1,
            armijo: 1e-4,
            backtrack: 0.5,
            max_iterations: 60,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterRecord {
    /// Regularization of the stage; 0 for the final unregularized stage.
    pub eps: f64,
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub u: Vec<f64>,
    /// Unregularized discrete energy `J(u)`.
    pub energy: f64,
    /// `max_i |ν_i|` over free nodes.
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub history: Vec<IterRecord>,
}

struct Work<'a> {
    model: &'a FeModel<'a>,
    free: Vec<usize>,
    local: Vec<usize>,
    cells: Vec<usize>,
    load: Vec<f64>,
}

impl Work<'_> {
    /// `Σ w|T|(ε² + q)^{p/2}/p − Σ b_i u_i` over active cells and free nodes.
    fn energy(&self, u: &[f64], eps: f64) -> f64 {
        let p = self.model.p;
        let e2 = eps * eps;
        let mut j = 0.0;
        for &t in &self.cells {
            let z = self.model.grad(t, u);
            let mz = mat_vec(&self.model.cell_matrix[t], z);
            let q = (mz[0] * z[0] + mz[1] * z[1]).max(0.0);
            j += self.model.cell_weight[t] * (e2 + q).powf(0.5 * p) * self.model.mesh.geometry[t].measure / p;
        }
        for (k, &i) in self.free.iter().enumerate() {
            j -= self.load[k] * u[i];
        }
        j
    }

    /// Gradient over free nodes, optionally assembling the Hessian with
    /// `(ε² + q)` floored at `floor²` in the curvature terms.
    fn gradient(&self, u: &[f64], eps: f64, hess: Option<(&mut Envelope, f64)>) -> Vec<f64> {
        let m = self.model;
        let p = m.p;
        let e2 = eps * eps;
        let mut g: Vec<f64> = self.load.iter().map(|b| -b).collect();
        let mut hess = hess;
        if let Some((h, _)) = hess.as_mut() {
            h.clear();
        }
        for &t in &self.cells {
            let geo = &m.mesh.geometry[t];
            let cell = m.mesh.cell(t);
            let z = m.grad(t, u);
            let mat = &m.cell_matrix[t];
            let mz = mat_vec(mat, z);
            let q = (mz[0] * z[0] + mz[1] * z[1]).max(0.0);
            let s = e2 + q;
            let wa = m.cell_weight[t] * geo.measure;
            let a = if s > 0.0 { s.powf(0.5 * (p - 2.0)) } else { 0.0 };
            let f = [wa * a * mz[0], wa * a * mz[1]];
            for (k, &v) in cell.iter().enumerate() {
                let lk = self.local[v];
                if lk != usize::MAX {
                    g[lk] += f[0] * geo.grads[k][0] + f[1] * geo.grads[k][1];
                }
            }
            if let Some((h, floor)) = hess.as_mut() {
                let sh = s.max(*floor * *floor);
                let ah = sh.powf(0.5 * (p - 2.0));
                let bh = if p == 2.0 { 0.0 } else { (p - 2.0) * sh.powf(0.5 * (p - 4.0)) };
                let d = [
                    [wa * (ah * mat[0][0] + bh * mz[0] * mz[0]), wa * (ah * mat[0][1] + bh * mz[0] * mz[1])],
                    [wa * (ah * mat[1][0] + bh * mz[1] * mz[0]), wa * (ah * mat[1][1] + bh * mz[1] * mz[1])],
                ];
                for (k, &vk) in cell.iter().enumerate() {
                    if self.local[vk] == usize::MAX {
                        continue;
                    }
                    let gk = geo.grads[k];
                    let dg = [d[0][0] * gk[0] + d[0][1] * gk[1], d[1][0] * gk[0] + d[1][1] * gk[1]];
                    for (l, &vl) in cell.iter().enumerate().take(k + 1) {
                        if self.local[vl] == usize::MAX {
                            continue;
                        }
                        let gl = geo.grads[l];
                        h.add(self.local[vk], self.local[vl], dg[0] * gl[0] + dg[1] * gl[1]);
                    }
                }
            }
        }
        g
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Minimizes `J(u) = Σ_T w_T (M∇u·∇u)^{p/2}|T|/p − Σ_i ρ_i u_i m_i` over
/// fields equal to `init` on the nodes marked `fixed`.
///
/// Regularized Newton with continuation in ε, finishing with Newton steps on
/// the unregularized energy until `max_i |ν_i| ≤ tol·(1 + max_i |ρ_i| m_i)`.
pub fn solve_dirichlet(
    model: &FeModel,
    rho: &[f64],
    fixed: &[bool],
    init: Vec<f64>,
    settings: &SolverSettings,
) -> Result<Solution, SolverError> {
    let n = model.mesh.n_nodes();
    check_len(n, rho)?;
    check_len(n, &init)?;
    if fixed.len() != n {
        return Err(SolverError::LengthMismatch { expected: n, found: fixed.len() });
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        local[i] = k;
    }
    let mut cells: Vec<usize> = free.iter().flat_map(|&i| model.mesh.star(i).iter().copied()).collect();
    cells.sort_unstable();
    cells.dedup();
    let load: Vec<f64> = free.iter().map(|&i| rho[i] * model.mass[i]).collect();
    let tol = settings.tolerance * (1.0 + sup_norm(&load));
    let work = Work { model, free, local, cells, load };
    let mut u = init;
    if work.free.is_empty() {
        let energy = work.energy(&u, 0.0);
        return Ok(Solution { u, energy, residual: 0.0, tolerance: tol, iterations: 0, history: vec![] });
    }

    let mut adj = vec![Vec::new(); work.free.len()];
    for &t in &work.cells {
        let c = model.mesh.cell(t);
        for &a in c {
            for &b in c {
                let (la, lb) = (work.local[a], work.local[b]);
                if a != b && la != usize::MAX && lb != usize::MAX {
                    adj[la].push(lb);
                }
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let mut env = Envelope::new(&adj);

    let mut stages = Vec::new();
    if model.p != 2.0 {
        let mut eps = settings.eps_start;
        while eps >= settings.eps_end * (1.0 - 1e-9) {
            stages.push(eps);
            eps *= settings.eps_factor;
        }
    }
    stages.push(0.0);
    let floor = if model.p == 2.0 { 0.0 } else { settings.eps_end };

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for (si, &eps) in stages.iter().enumerate() {
        let last = si + 1 == stages.len();
        let stage_tol = if last { tol } else { 1e3 * tol };
        let mut energy = work.energy(&u, eps);
        let mut done = false;
        for _ in 0..settings.max_iterations {
            let hfloor = if last { floor } else { 0.0 };
            let g = work.gradient(&u, eps, Some((&mut env, hfloor)));
            residual = sup_norm(&g);
            if residual <= stage_tol {
                done = true;
                break;
            }
            env.factor()?;
            let d = env.solve(&g);
            let slope: f64 = -g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
            let trial = |t: f64, u: &[f64]| {
                let mut v = u.to_vec();
                for (k, &i) in work.free.iter().enumerate() {
                    v[i] -= t * d[k];
                }
                v
            };
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let v = trial(t, &u);
                let e = work.energy(&v, eps);
                if e <= energy + settings.armijo * t * slope && e < energy {
                    accepted = Some((v, e));
                    break;
                }
                t *= settings.backtrack;
            }
            if accepted.is_none() {
                // Near the minimizer energy differences drop below rounding;
                // fall back to steps that reduce the residual without
                // raising J beyond rounding.
                t = 1.0;
                for _ in 0..20 {
                    let v = trial(t, &u);
                    let e = work.energy(&v, eps);
                    let gv = sup_norm(&work.gradient(&v, eps, None));
                    if e <= energy + 1e-12 * (1.0 + energy.abs()) && gv < (1.0 - 1e-4 * t) * residual {
                        accepted = Some((v, e));
                        break;
                    }
                    t *= settings.backtrack;
                }
            }
            let Some((v, e)) = accepted else { break };
            u = v;
            energy = e;
            iterations += 1;
            history.push(IterRecord { eps, energy, residual, step: t });
        }
        if last && !done {
            let g = work.gradient(&u, 0.0, None);
            residual = sup_norm(&g);
            if residual > tol {
                return Err(SolverError::NonConvergence {
                    iterations,
                    residual,
                    tolerance: tol,
                    history: history.iter().map(|h| h.residual).collect(),
                });
            }
        }
    }
    let energy = work.energy(&u, 0.0);
    Ok(Solution { u, energy, residual, tolerance: tol, iterations, history })
}
