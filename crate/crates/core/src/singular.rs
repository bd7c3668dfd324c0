//! Dirichlet problems with sources blowing up at Γ: truncation scheme,
//! barrier majorant and the quantitative boundary bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barrier::CalibratedConstants;
use crate::geometry::ScaleLadder;
use crate::solver::{solve_dirichlet, FeModel, SolverError, SolverSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SingularError {
    #[error("amplitude K = {0} must be positive and finite")]
    BadAmplitude(f64),
    #[error("exponent β = {0} must be positive")]
    BadExponent(f64),
    #[error("cutoff schedule needs r_0 > 0 and a factor above 1")]
    BadSchedule,
    #[error("probe region {{δ ≥ {0}}} contains no interior node")]
    EmptyProbe(f64),
    #[error("iterate {iterate} exceeds the barrier majorant at node {node} (|u| = {value}, v = {bound})")]
    MajorantViolation { iterate: usize, node: usize, value: f64, bound: f64 },
    #[error("no Cauchy stop within {0} cutoffs")]
    NonConvergence(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceSign {
    #[default]
    Positive,
    Negative,
    /// Sign of `sin(2π(x + y))`, positive on the zero set.
    Signed,
}

/// `ρ(x) = ±K δ_Γ(x)^{β(p−1)−p}`, zero on Γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularSource {
    pub amplitude: f64,
    pub beta: f64,
    #[serde(default)]
    pub sign: SourceSign,
}

impl SingularSource {
    pub fn validate(&self) -> Result<(), SingularError> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(SingularError::BadAmplitude(self.amplitude));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(SingularError::BadExponent(self.beta));
        }
        Ok(())
    }

    pub fn density(&self, model: &FeModel, delta: &[f64]) -> Vec<f64> {
        let p = model.p;
        model
            .mesh
            .nodes
            .iter()
            .zip(delta)
            .map(|(x, &d)| {
                if d <= 0.0 {
                    return 0.0;
                }
                let sign = match self.sign {
                    SourceSign::Positive => 1.0,
                    SourceSign::Negative => -1.0,
                    SourceSign::Signed => {
                        if (std::f64::consts::TAU * (x[0] + x[1])).sin() < 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                };
                sign * self.amplitude * d.powf(self.beta * (p - 1.0) - p)
            })
            .collect()
    }
}

/// Cutoff radii `r_m = r_0 / factor^m` and the probe region `{δ ≥ probe}`
/// on which consecutive iterates are compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSchedule {
    pub r0: f64,
    pub factor: f64,
    pub probe: f64,
    pub max_cutoffs: usize,
}

impl CutoffSchedule {
    /// Starts at the finest resolved scale `R_{k_hi}`; the probe radius is
    /// capped at half the largest distance so the probe region is never empty.
    pub fn from_ladder(ladder: &ScaleLadder, delta_max: f64, factor: f64, max_cutoffs: usize) -> Self {
        let r0 = ladder.radius_of(ladder.k_hi);
        Self { r0, factor, probe: r0.min(0.5 * delta_max), max_cutoffs }
    }

    pub fn radius(&self, m: usize) -> f64 {
        self.r0 / self.factor.powi(m as i32)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterateRecord {
    pub m: usize,
    pub cutoff: f64,
    /// Nodes where the truncated source is active.
    pub active: usize,
    pub sup_norm: f64,
    /// `max |u_m − u_{m−1}|` over the probe region.
    pub change: Option<f64>,
    /// p-energy over cells with every node in the probe region.
    pub probe_energy: f64,
    /// Largest `|u_m| / v` over nodes with `v > 0`.
    pub majorant_ratio: Option<f64>,
    /// Smallest `u_m − u_{m−1}` over probe nodes.
    pub min_increment: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationRun {
    pub schedule: CutoffSchedule,
    pub stop_tol: f64,
    pub iterates: Vec<IterateRecord>,
    #[serde(skip)]
    pub u: Vec<f64>,
    pub converged: bool,
}

impl TruncationRun {
    pub fn table_csv(&self) -> String {
        let mut s = String::from("m,cutoff,active,sup_norm,change,probe_energy,majorant_ratio\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.iterates {
            s += &format!(
                "{},{},{},{},{},{},{}\n",
                r.m,
                r.cutoff,
                r.active,
                r.sup_norm,
                opt(r.change),
                r.probe_energy,
                opt(r.majorant_ratio)
            );
        }
        s
    }

    /// Ratio of the last two probe energies, i.e. after the Cauchy stop.
    pub fn final_energy_ratio(&self) -> Option<f64> {
        let [.., a, b] = self.iterates.as_slice() else { return None };
        let (a, b) = (a.probe_energy, b.probe_energy);
        Some(if a == b { 1.0 } else { (b / a).max(a / b) })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Solves `−div A(x,∇u_m) = ρ 1_{δ > r_m}` with zero data on ∂Ω for
/// decreasing cutoffs, warm-starting each solve, until the probe-region
/// change drops below `stop_tol (1 + ‖u_m‖_∞)`. Stopping needs the previous
/// cutoff to have switched some source on. Every iterate is checked
/// against the majorant `v` on the nodes of its mask when one is given.
pub fn solve_singular(
    model: &FeModel,
    delta: &[f64],
    src: &SingularSource,
    schedule: CutoffSchedule,
    stop_tol: f64,
    majorant: Option<(&[f64], &[bool])>,
    settings: &SolverSettings,
) -> Result<TruncationRun, SingularError> {
    src.validate()?;
    if !(schedule.r0 > 0.0 && schedule.factor > 1.0) {
        return Err(SingularError::BadSchedule);
    }
    let mesh = model.mesh;
    let n = mesh.n_nodes();
    let rho = src.density(model, delta);
    let probe: Vec<bool> = (0..n).map(|i| delta[i] >= schedule.probe && !mesh.boundary[i]).collect();
    if !probe.contains(&true) {
        return Err(SingularError::EmptyProbe(schedule.probe));
    }
    let probe_cells: Vec<usize> = (0..mesh.n_cells())
        .filter(|&t| mesh.cell(t).iter().all(|&v| delta[v] >= schedule.probe))
        .collect();
    let v_slack = majorant.map(|(v, _)| 1e-6 * (1.0 + sup(v)));
    let mut u = vec![0.0; n];
    let mut iterates: Vec<IterateRecord> = Vec::new();
    for m in 0..schedule.max_cutoffs {
        let r = schedule.radius(m);
        let rho_m: Vec<f64> = (0..n).map(|i| if delta[i] > r { rho[i] } else { 0.0 }).collect();
        let active = (0..n).filter(|&i| delta[i] > r && !mesh.boundary[i]).count();
        let next = solve_dirichlet(model, &rho_m, &mesh.boundary, u.clone(), settings)?.u;
        let mut majorant_ratio = None;
        if let (Some((v, mask)), Some(slack)) = (majorant, v_slack) {
            for i in (0..n).filter(|&i| mask[i]) {
                if next[i].abs() > v[i] + slack {
                    return Err(SingularError::MajorantViolation { iterate: m, node: i, value: next[i].abs(), bound: v[i] });
                }
                if v[i] > 0.0 {
                    let q = next[i].abs() / v[i];
                    majorant_ratio = Some(majorant_ratio.map_or(q, |a: f64| a.max(q)));
                }
            }
        }
        let (change, min_increment) = if m == 0 {
            (None, None)
        } else {
            let diffs = (0..n).filter(|&i| probe[i]).map(|i| next[i] - u[i]);
            let (c, lo) = diffs.fold((0.0f64, f64::INFINITY), |(c, lo), d| (c.max(d.abs()), lo.min(d)));
            (Some(c), Some(lo))
        };
        let probe_energy = probe_cells.iter().map(|&t| model.cell_p_energy(t, &next)).sum();
        let sup_prev = sup(&u);
        let started = iterates.last().is_some_and(|r| r.active > 0);
        u = next;
        iterates.push(IterateRecord {
            m,
            cutoff: r,
            active,
            sup_norm: sup(&u),
            change,
            probe_energy,
            majorant_ratio,
            min_increment,
        });
        if started && change.is_some_and(|c| c <= stop_tol * (1.0 + sup_prev)) {
            return Ok(TruncationRun { schedule, stop_tol, iterates, u, converged: true });
        }
    }
    Err(SingularError::NonConvergence(schedule.max_cutoffs))
}

/// `C = c_H^{1−p} 30^{β/α} (α/β)`.
pub fn theorem_constant(c_h: f64, alpha: f64, beta: f64, p: f64) -> f64 {
    c_h.powf(1.0 - p) * 30f64.powf(beta / alpha) * (alpha / beta)
}

/// The constant obtained by composing the barrier bound with the transform
/// `g`: `c_H^{−1/(p−1)} 30^{β/α} (α/β)`.
pub fn transform_constant(c_h: f64, alpha: f64, beta: f64, p: f64) -> f64 {
    c_h.powf(-1.0 / (p - 1.0)) * 30f64.powf(beta / alpha) * (alpha / beta)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub constant: f64,
    pub transform_constant: f64,
    pub checked: usize,
    pub violations: Vec<usize>,
    /// Largest `|u| / (C K^{1/(p−1)} δ^β)` over resolved nodes.
    pub utilization: f64,
    /// Same with the transform constant.
    pub transform_utilization: f64,
    /// `max |u|` on nodes with `δ < r_fine` against `C K^{1/(p−1)} r_fine^β`.
    pub boundary_layer: (f64, f64),
    pub passed: bool,
}

/// Checks `|u| ≤ C K^{1/(p−1)} δ^β` at every resolved node.
pub fn verify_theorem_bound(
    u: &[f64],
    delta: &[f64],
    resolved: &[bool],
    constants: &CalibratedConstants,
    src: &SingularSource,
    r_fine: f64,
) -> BoundReport {
    let p = constants.p;
    let c = theorem_constant(constants.c_h, constants.alpha, src.beta, p);
    let ct = transform_constant(constants.c_h, constants.alpha, src.beta, p);
    let kp = src.amplitude.powf(1.0 / (p - 1.0));
    let mut rep = BoundReport {
        constant: c,
        transform_constant: ct,
        checked: 0,
        violations: Vec::new(),
        utilization: 0.0,
        transform_utilization: 0.0,
        boundary_layer: (0.0, c * kp * r_fine.powf(src.beta)),
        passed: true,
    };
    for i in 0..u.len() {
        if delta[i] < r_fine {
            rep.boundary_layer.0 = rep.boundary_layer.0.max(u[i].abs());
        }
        if !resolved[i] || delta[i] <= 0.0 {
            continue;
        }
        rep.checked += 1;
        let scale = kp * delta[i].powf(src.beta);
        let q = u[i].abs() / (c * scale);
        rep.utilization = rep.utilization.max(q);
        rep.transform_utilization = rep.transform_utilization.max(u[i].abs() / (ct * scale));
        if q > 1.0 {
            rep.violations.push(i);
        }
    }
    rep.passed = rep.violations.is_empty() && rep.boundary_layer.0 <= rep.boundary_layer.1;
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub max_difference: f64,
    pub tolerance: f64,
    pub agree: bool,
}

/// Nodal agreement of two converged runs to `10 stop_tol (1 + ‖u‖_∞)`.
pub fn uniqueness_probe(u: &[f64], other: &[f64], stop_tol: f64) -> UniquenessReport {
    let max_difference = u.iter().zip(other).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let tolerance = 10.0 * stop_tol * (1.0 + sup(u));
    UniquenessReport { max_difference, tolerance, agree: u.len() == other.len() && max_difference <= tolerance }
}
