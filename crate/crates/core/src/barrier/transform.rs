use serde::Serialize;

use super::verify::glue_acceptable;
use super::{BarrierError, BarrierLadder, SandwichReport};
use crate::solver::{glue_min, Branch, FeModel, GlueReport};

/// `g(s) = coef · s^expo` with `coef = (K/c_H)^{1/(p−1)} α/β` and `expo = β/α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerTransform {
    pub coef: f64,
    pub expo: f64,
}

impl PowerTransform {
    pub fn new(amplitude: f64, beta: f64, alpha: f64, c_h: f64, p: f64) -> Self {
        Self { coef: (amplitude / c_h).powf(1.0 / (p - 1.0)) * alpha / beta, expo: beta / alpha }
    }

    #[inline]
    pub fn apply(&self, s: f64) -> f64 {
        self.coef * s.powf(self.expo)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub beta: f64,
    pub amplitude: f64,
    pub transform: PowerTransform,
    /// `v = g(s_Γ)`.
    #[serde(skip)]
    pub values: Vec<f64>,
    /// `K δ^{β(p−1)−p}` at resolved interior nodes, 0 elsewhere.
    #[serde(skip)]
    pub density: Vec<f64>,
    pub check: GlueReport,
    /// `g(δ^α) ≤ v ≤ g(30 δ^α)` on resolved nodes.
    pub bounds: SandwichReport,
    pub passed: bool,
}

/// `v = g(s_Γ)` and its supersolution check against
/// `c_H h(δ^α)^{p−1}/δ^p = K δ^{β(p−1)−p}` with `h(t) = (K/c_H)^{1/(p−1)} t^{β/α}`.
pub fn transform_barrier(
    model: &FeModel,
    barrier: &BarrierLadder,
    beta: f64,
    amplitude: f64,
) -> Result<TransformReport, BarrierError> {
    let c = &barrier.constants;
    let p = c.p;
    if !(beta > 0.0 && beta <= c.alpha) {
        return Err(BarrierError::BadExponent { beta, alpha: c.alpha });
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(BarrierError::BadAmplitude(amplitude));
    }
    let g = PowerTransform::new(amplitude, beta, c.alpha, c.c_h, p);
    let mesh = model.mesh;
    let n = mesh.n_nodes();
    let interior: Vec<bool> = (0..n).map(|i| barrier.resolved[i] && !mesh.boundary[i]).collect();
    let density: Vec<f64> = (0..n)
        .map(|i| {
            if interior[i] {
                amplitude * barrier.delta[i].powf(beta * (p - 1.0) - p)
            } else {
                0.0
            }
        })
        .collect();
    let branches = barrier.branches(&density, Some(g));
    let refs: Vec<&dyn Branch> = branches.iter().map(|b| b as &dyn Branch).collect();
    let (values, check) = glue_min(model, &refs, Some(&interior));
    let mut bounds = SandwichReport::new();
    for i in (0..n).filter(|&i| barrier.resolved[i]) {
        let da = barrier.delta[i].powf(c.alpha);
        bounds.record(i, values[i], g.apply(da), g.apply(30.0 * da));
    }
    let total = interior.iter().filter(|&&b| b).count();
    let passed = bounds.passed() && glue_acceptable(&check, total);
    Ok(TransformReport { beta, amplitude, transform: g, values, density, check, bounds, passed })
}
