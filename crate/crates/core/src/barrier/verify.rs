use serde::Serialize;

use super::BarrierLadder;
use crate::solver::{glue_min, Branch, FeModel, GlueReport};

/// Two-sided nodal bound `lower ≤ value ≤ upper` with relative margins.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SandwichReport {
    pub checked: usize,
    pub violations: Vec<usize>,
    /// Smallest `value/lower − 1`.
    pub worst_lower: f64,
    /// Smallest `1 − value/upper`.
    pub worst_upper: f64,
}

impl SandwichReport {
    pub(crate) fn new() -> Self {
        Self { checked: 0, violations: Vec::new(), worst_lower: f64::INFINITY, worst_upper: f64::INFINITY }
    }

    pub(crate) fn record(&mut self, i: usize, value: f64, lower: f64, upper: f64) {
        self.checked += 1;
        let lo = value / lower - 1.0;
        let hi = 1.0 - value / upper;
        self.worst_lower = self.worst_lower.min(lo);
        self.worst_upper = self.worst_upper.min(hi);
        if lo < -1e-12 || hi < -1e-12 {
            self.violations.push(i);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest `s_Γ` on the band `E_k ∖ E_{k+1}` and its ratio to the previous band.
#[derive(Clone, Debug, Serialize)]
pub struct BandEnvelope {
    pub k: i32,
    pub nodes: usize,
    pub max: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierVerification {
    pub formulas_match: bool,
    /// `δ^α ≤ s_Γ ≤ 30 δ^α` on resolved nodes.
    pub sandwich: SandwichReport,
    /// `(1/4)(3/4)^k ≤ s ≤ (5/4)(4/3)⁵(3/4)^k` on resolved nodes of band k.
    pub band_bounds: SandwichReport,
    /// `1/4 ≤ v_k ≤ 5/4`, `v_k ≤ 1/2` on `E_{k+1}` and `v_k = 1` off `D_k`.
    pub layer_bounds: bool,
    /// Whether every layer passes its supersolution check within the
    /// statistical acceptance rule.
    pub layers_supersolution: bool,
    /// `s_Γ` against `c_H s_Γ^{p−1}/δ^p`.
    pub barrier: GlueReport,
    /// `s_Γ` against `4^{p−1} (3/4)^{k(p−1)} c₃ R_{k−5}^{−p}` on band k.
    pub riesz: GlueReport,
    pub resolved_interior: usize,
    /// Fraction of resolved interior nodes passing the barrier check.
    pub pass_fraction: f64,
    pub violations_on_interfaces: bool,
    /// Violation mass over total residual mass of the barrier check.
    pub violation_mass_ratio: f64,
    pub envelope: Vec<BandEnvelope>,
    pub passed: bool,
}

/// Acceptance rule for a min-of-supersolutions check: at least 99% of the
/// `total` nodes pass, failures sit on min-interfaces and carry at most
/// 10⁻³ of the residual mass.
pub(crate) fn glue_acceptable(rep: &GlueReport, total: usize) -> bool {
    let failed = rep.violations.len() + rep.uncovered.len();
    let fraction = if total == 0 { 1.0 } else { 1.0 - failed as f64 / total as f64 };
    fraction >= 0.99
        && rep.violations.iter().all(|v| v.2)
        && rep.violation_mass <= 1e-3 * rep.residual_mass
}

pub fn verify_barrier(model: &FeModel, barrier: &BarrierLadder) -> BarrierVerification {
    let mesh = model.mesh;
    let n = mesh.n_nodes();
    let c = &barrier.constants;
    let p = c.p;
    let formulas_match = c.formulas_match();

    let mut sandwich = SandwichReport::new();
    let mut band_bounds = SandwichReport::new();
    for i in (0..n).filter(|&i| barrier.resolved[i]) {
        let da = barrier.delta[i].powf(c.alpha);
        sandwich.record(i, barrier.s_gamma[i], da, 30.0 * da);
        let w = BarrierLadder::weight_of(barrier.node_scale[i]);
        band_bounds.record(i, barrier.s[i], 0.25 * w, 1.25 * (4.0f64 / 3.0).powi(5) * w);
    }

    let layer_bounds = barrier.layers.iter().all(|l| {
        l.min >= 0.25 - 1e-8 && l.max <= 1.25 + 1e-8 && l.next_max <= 0.5 + 1e-8 && l.unit_off_d
    });
    let layers_supersolution = barrier.layers.iter().all(|l| {
        let total = l.glue.checked + l.glue.uncovered.len();
        let failed = l.glue.violations.len();
        (total == 0 || failed as f64 <= 0.01 * total as f64)
            && l.glue.violations.iter().all(|v| v.2)
            && l.glue.violation_mass <= 1e-3 * l.glue.residual_mass
    });

    let interior: Vec<bool> = (0..n).map(|i| barrier.resolved[i] && !mesh.boundary[i]).collect();
    let resolved_interior = interior.iter().filter(|&&b| b).count();
    let target: Vec<f64> = (0..n)
        .map(|i| {
            if interior[i] {
                c.c_h * barrier.s_gamma[i].powf(p - 1.0) / barrier.delta[i].powf(p)
            } else {
                0.0
            }
        })
        .collect();
    let riesz_rho: Vec<f64> = (0..n)
        .map(|i| {
            let k = barrier.node_scale[i];
            4f64.powf(p - 1.0)
                * BarrierLadder::weight_of(k).powf(p - 1.0)
                * c.c3
                * barrier.ladder.radius_of(k - 5).powf(-p)
        })
        .collect();
    let run = |rho: &[f64]| {
        let branches = barrier.branches(rho, None);
        let refs: Vec<&dyn Branch> = branches.iter().map(|b| b as &dyn Branch).collect();
        glue_min(model, &refs, Some(&interior)).1
    };
    let barrier_rep = run(&target);
    let riesz = run(&riesz_rho);

    let failed = barrier_rep.violations.len() + barrier_rep.uncovered.len();
    let pass_fraction = if resolved_interior == 0 { 1.0 } else { 1.0 - failed as f64 / resolved_interior as f64 };
    let violations_on_interfaces = barrier_rep.violations.iter().all(|v| v.2);
    let violation_mass_ratio = if barrier_rep.residual_mass > 0.0 {
        barrier_rep.violation_mass / barrier_rep.residual_mass
    } else {
        0.0
    };

    let mut envelope: Vec<BandEnvelope> = Vec::new();
    for scale in &barrier.ladder.scales {
        let next = barrier.ladder.radius_of(scale.k + 1);
        let band: Vec<usize> = (0..n)
            .filter(|&i| interior[i] && barrier.node_scale[i] == scale.k && barrier.delta[i] > next)
            .collect();
        if band.is_empty() {
            continue;
        }
        let max = band.iter().map(|&i| barrier.s_gamma[i]).fold(f64::NEG_INFINITY, f64::max);
        let ratio = envelope.last().filter(|e| e.k == scale.k - 1).map(|e| max / e.max);
        envelope.push(BandEnvelope { k: scale.k, nodes: band.len(), max, ratio });
    }

    let passed = formulas_match
        && sandwich.passed()
        && band_bounds.passed()
        && layer_bounds
        && glue_acceptable(&barrier_rep, resolved_interior);
    BarrierVerification {
        formulas_match,
        sandwich,
        band_bounds,
        layer_bounds,
        layers_supersolution,
        barrier: barrier_rep,
        riesz,
        resolved_interior,
        pass_fraction,
        violations_on_interfaces,
        violation_mass_ratio,
        envelope,
        passed,
    }
}
