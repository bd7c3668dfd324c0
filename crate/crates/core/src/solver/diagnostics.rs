use super::{check_len, FeModel, SolverError};
use crate::geometry::{dist, Mesh, Point};

/// Closed-ball membership with a relative tolerance, so nodes exactly on the
/// sphere count as inside despite rounding.
#[inline]
pub(crate) fn in_closed_ball(x: Point, c: Point, r: f64) -> bool {
    dist(x, c) <= r * (1.0 + 1e-12)
}

/// `(⨍_B u^s dw)^{1/s} / (min_B u + F₋)` with `F₋ = (R^p ‖ρ₋‖_{∞,2B})^{1/(p−1)}`.
///
/// Returns `f64::INFINITY` when the denominator vanishes.
pub fn harnack_diagnostic(
    model: &FeModel,
    u: &[f64],
    center: Point,
    radius: f64,
    s: f64,
    rho: &[f64],
) -> Result<f64, SolverError> {
    let mesh = model.mesh;
    check_len(mesh.n_nodes(), u)?;
    check_len(mesh.n_nodes(), rho)?;
    let p = model.p;
    if !(s > 0.0 && s < p - 1.0) {
        return Err(SolverError::Precondition(format!("exponent s = {s} must lie in (0, p − 1)")));
    }
    let in_2b: Vec<usize> = (0..mesh.n_nodes())
        .filter(|&i| in_closed_ball(mesh.nodes[i], center, 2.0 * radius))
        .collect();
    if let Some(&i) = in_2b.iter().find(|&&i| u[i] < 0.0) {
        return Err(SolverError::Precondition(format!("u is negative at node {i} inside 2B")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for t in 0..mesh.n_cells() {
        let g = &mesh.geometry[t];
        if !in_closed_ball(g.barycenter, center, radius) {
            continue;
        }
        let c = mesh.cell(t);
        let ub = c.iter().map(|&v| u[v]).sum::<f64>() / c.len() as f64;
        let wm = model.cell_weight[t] * g.measure;
        num += ub.powf(s) * wm;
        den += wm;
    }
    let min_b = (0..mesh.n_nodes())
        .filter(|&i| in_closed_ball(mesh.nodes[i], center, radius))
        .map(|i| u[i])
        .fold(f64::INFINITY, f64::min);
    if den == 0.0 || !min_b.is_finite() {
        return Err(SolverError::Precondition("ball contains no cells".into()));
    }
    let rho_minus = in_2b.iter().map(|&i| (-rho[i]).max(0.0)).fold(0.0, f64::max);
    let f_minus = (radius.powf(p) * rho_minus).powf(1.0 / (p - 1.0));
    let denom = min_b + f_minus;
    let mean = (num / den).powf(1.0 / s);
    if denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(mean / denom)
}

/// `sup_{θB} u / sup_B u` over mesh nodes in the closed balls around `xi`;
/// `0/0` is reported as 0.
pub fn oscillation_probe(mesh: &Mesh, u: &[f64], xi: Point, radius: f64, theta: f64) -> Result<f64, SolverError> {
    check_len(mesh.n_nodes(), u)?;
    if radius < 4.0 * mesh.h {
        return Err(SolverError::Precondition(format!(
            "radius {radius} is below the resolvable size 4h = {}",
            4.0 * mesh.h
        )));
    }
    let sup = |r: f64| {
        (0..mesh.n_nodes())
            .filter(|&i| in_closed_ball(mesh.nodes[i], xi, r))
            .map(|i| u[i])
            .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))))
    };
    let inner = sup(theta * radius)
        .ok_or_else(|| SolverError::Precondition("no node inside θB".into()))?;
    let outer = sup(radius).unwrap_or(0.0);
    if outer == 0.0 && inner == 0.0 {
        return Ok(0.0);
    }
    Ok(inner / outer)
}
