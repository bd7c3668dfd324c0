use serde::Serialize;

use super::{check_len, FeModel, SolverError};

/// Nodal weak-form residuals `ν_i = ∫ A(x,∇u)·∇φ_i − ∫ ρ φ_i dw` and the
/// lumped masses `m_i = ∫ φ_i dw`. Values at boundary nodes are assembled
/// the same way but carry no meaning as measures.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualMeasure {
    pub nu: Vec<f64>,
    pub mass: Vec<f64>,
}

pub fn residual_measure(model: &FeModel, u: &[f64], rho: &[f64]) -> Result<ResidualMeasure, SolverError> {
    let n = model.mesh.n_nodes();
    check_len(n, u)?;
    check_len(n, rho)?;
    let mut nu: Vec<f64> = (0..n).map(|i| -rho[i] * model.mass[i]).collect();
    for t in 0..model.mesh.n_cells() {
        let f = model.flux(t, model.grad(t, u));
        let geo = &model.mesh.geometry[t];
        for (k, &v) in model.mesh.cell(t).iter().enumerate() {
            nu[v] += geo.measure * (f[0] * geo.grads[k][0] + f[1] * geo.grads[k][1]);
        }
    }
    Ok(ResidualMeasure { nu, mass: model.mass.clone() })
}

/// Flux part of the residual at one node for a field given pointwise.
pub fn node_residual(model: &FeModel, i: usize, value: impl Fn(usize) -> f64) -> f64 {
    let mut r = 0.0;
    for &t in model.mesh.star(i) {
        let geo = &model.mesh.geometry[t];
        let cell = model.mesh.cell(t);
        let mut z = [0.0, 0.0];
        let mut k_i = 0;
        for (k, &v) in cell.iter().enumerate() {
            let uv = value(v);
            z[0] += uv * geo.grads[k][0];
            z[1] += uv * geo.grads[k][1];
            if v == i {
                k_i = k;
            }
        }
        let f = model.flux(t, z);
        r += geo.measure * (f[0] * geo.grads[k_i][0] + f[1] * geo.grads[k_i][1]);
    }
    r
}

/// `τ_i = 10⁻⁶ (1 + |ρ_i|) m_i`.
#[inline]
pub fn supersolution_tolerance(rho_i: f64, m_i: f64) -> f64 {
    1e-6 * (1.0 + rho_i.abs()) * m_i
}

#[derive(Clone, Debug, Serialize)]
pub struct SupersolutionReport {
    pub passed: bool,
    pub checked: usize,
    /// Nodes with `ν_i < −τ_i`.
    pub violations: Vec<usize>,
    pub worst_node: Option<usize>,
    /// `min_i (ν_i + τ_i) / m_i` over checked nodes.
    pub worst_margin: f64,
}

/// Passes iff `ν_i ≥ −τ_i` at every interior node (restricted to `mask`).
pub fn supersolution_check(
    model: &FeModel,
    u: &[f64],
    rho: &[f64],
    mask: Option<&[bool]>,
) -> Result<SupersolutionReport, SolverError> {
    let r = residual_measure(model, u, rho)?;
    let mut rep = SupersolutionReport {
        passed: true,
        checked: 0,
        violations: Vec::new(),
        worst_node: None,
        worst_margin: f64::INFINITY,
    };
    for i in 0..u.len() {
        if model.mesh.boundary[i] || mask.is_some_and(|m| !m[i]) {
            continue;
        }
        rep.checked += 1;
        let margin = r.nu[i] + supersolution_tolerance(rho[i], r.mass[i]);
        let scaled = margin / r.mass[i];
        if scaled < rep.worst_margin {
            rep.worst_margin = scaled;
            rep.worst_node = Some(i);
        }
        if margin < 0.0 {
            rep.violations.push(i);
        }
    }
    rep.passed = rep.violations.is_empty();
    Ok(rep)
}

/// One supersolution entering a nodal minimum.
pub trait Branch: Sync {
    fn value(&self, i: usize) -> f64;
    /// Source density the branch is a supersolution for.
    fn rho(&self, i: usize) -> f64;
    /// Whether the branch is a supersolution at node `i`.
    fn covers(&self, i: usize) -> bool;
    /// Finite value used when the branch enters a neighbor's residual;
    /// differs from `value` for branches set to `+∞` off their domain.
    fn raw(&self, i: usize) -> f64 {
        self.value(i)
    }
}

/// A branch stored as full nodal vectors.
pub struct DenseBranch<'a> {
    pub values: &'a [f64],
    pub rho: &'a [f64],
    pub mask: Option<&'a [bool]>,
}

impl Branch for DenseBranch<'_> {
    fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
    fn rho(&self, i: usize) -> f64 {
        self.rho[i]
    }
    fn covers(&self, i: usize) -> bool {
        self.mask.is_none_or(|m| m[i])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GlueReport {
    pub passed: bool,
    pub checked: usize,
    /// Checked nodes whose star sees a different minimizing branch.
    pub interface_nodes: usize,
    /// Interior nodes where no minimizing branch is a supersolution.
    pub uncovered: Vec<usize>,
    /// `(node, margin, on_interface)` for every failure.
    pub violations: Vec<(usize, f64, bool)>,
    /// Smallest `(ν_i − ρ_i m_i + τ'_i) / m_i` over checked nodes.
    pub worst_margin: f64,
    /// `Σ |margin|` over violations.
    pub violation_mass: f64,
    /// `Σ |ν_i|` over checked nodes, with `ν_i` the flux residual of the min.
    pub residual_mass: f64,
}

/// Nodal minimum of the branches and its supersolution check.
///
/// A node is checked when some branch attaining the minimum there covers it;
/// the density is the smallest `ρ` among such branches. The tolerance is
/// `10 τ_i`, plus `10⁻³ max_j |ν[u_j]_i| + h m_i` when the minimizing branch
/// changes within the node's star, with `ν[u_j]` the raw flux residual of
/// the branches active in the star.
pub fn glue_min(
    model: &FeModel,
    branches: &[&dyn Branch],
    restrict: Option<&[bool]>,
) -> (Vec<f64>, GlueReport) {
    let mesh = model.mesh;
    let n = mesh.n_nodes();
    let (values, argmin): (Vec<f64>, Vec<usize>) = (0..n)
        .map(|i| {
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, b) in branches.iter().enumerate() {
                let v = b.value(i);
                if v < best.0 {
                    best = (v, j);
                }
            }
            best
        })
        .unzip();
    let mut rep = GlueReport {
        passed: true,
        checked: 0,
        interface_nodes: 0,
        uncovered: Vec::new(),
        violations: Vec::new(),
        worst_margin: f64::INFINITY,
        violation_mass: 0.0,
        residual_mass: 0.0,
    };
    for i in 0..n {
        if mesh.boundary[i] || restrict.is_some_and(|r| !r[i]) {
            continue;
        }
        let mut chosen: Option<usize> = None;
        for (j, b) in branches.iter().enumerate() {
            if b.value(i) == values[i] && b.covers(i) && chosen.is_none_or(|c| b.rho(i) < branches[c].rho(i)) {
                chosen = Some(j);
            }
        }
        let Some(j) = chosen else {
            rep.uncovered.push(i);
            continue;
        };
        rep.checked += 1;
        let rho = branches[j].rho(i);
        let star_nodes: Vec<usize> = mesh.star(i).iter().flat_map(|&t| mesh.cell(t).iter().copied()).collect();
        let interface = star_nodes.iter().any(|&y| branches[j].value(y) != values[y]);
        let flux = node_residual(model, i, |y| values[y]);
        rep.residual_mass += flux.abs();
        let nu = flux - rho * model.mass[i];
        let mut tol = 10.0 * supersolution_tolerance(rho, model.mass[i]);
        if interface {
            rep.interface_nodes += 1;
            let mut others: Vec<usize> = star_nodes.iter().map(|&y| argmin[y]).filter(|&b| b != usize::MAX).collect();
            others.push(j);
            others.sort_unstable();
            others.dedup();
            let biggest = others
                .iter()
                .map(|&b| node_residual(model, i, |y| branches[b].raw(y)).abs())
                .fold(0.0, f64::max);
            tol += 1e-3 * biggest + mesh.h * model.mass[i];
        }
        let margin = nu + tol;
        rep.worst_margin = rep.worst_margin.min(margin / model.mass[i]);
        if margin < 0.0 {
            rep.violations.push((i, margin, interface));
            rep.violation_mass -= margin;
        }
    }
    rep.passed = rep.violations.is_empty();
    (values, rep)
}

/// Checks that both inputs are supersolutions on their masks and that their
/// nodal minimum is one with the relaxed glueing tolerance.
pub fn glueing_check(
    model: &FeModel,
    u: DenseBranch,
    v: DenseBranch,
) -> Result<(Vec<f64>, GlueReport), SolverError> {
    for (k, b) in [&u, &v].into_iter().enumerate() {
        let rep = supersolution_check(model, b.values, b.rho, b.mask)?;
        if let Some(&node) = rep.violations.first() {
            let r = residual_measure(model, b.values, b.rho)?;
            return Err(SolverError::NotSupersolution { branch: k, node, deficit: -r.nu[node] });
        }
    }
    Ok(glue_min(model, &[&u, &v], None))
}

/// Passes iff `u₁ ≤ u₂ + 10⁻⁸ (1 + ‖u₂‖_∞)` at every node.
pub fn comparison_check(u1: &[f64], u2: &[f64]) -> Result<bool, SolverError> {
    check_len(u2.len(), u1)?;
    let slack = 1e-8 * (1.0 + u2.iter().fold(0.0f64, |a, x| a.max(x.abs())));
    Ok(u1.iter().zip(u2).all(|(a, b)| *a <= b + slack))
}
