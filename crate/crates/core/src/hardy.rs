//! Hardy inequalities `c ∫ |φ|^p δ_Γ^{−p} dw ≤ ∫ |∇φ|^p dw`: direct
//! evaluation, the Picone route through a barrier's residual measure, and a
//! best-constant estimate by nonlinear inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GammaSet, Mesh};
use crate::solver::{residual_measure, solve_dirichlet, FeModel, SolverError, SolverSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("test function is {value} at boundary node {node}")]
    NonzeroOnBoundary { node: usize, value: f64 },
    #[error("test function is negative at node {0}")]
    Negative(usize),
    #[error("barrier is {value} at interior node {node}")]
    NonpositiveBarrier { node: usize, value: f64 },
    #[error("Γ is empty")]
    EmptyGamma,
    #[error("Hardy integral of the start vanishes")]
    DegenerateStart,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Barycenter quadrature for `∫ |φ|^p δ_Γ^{−p} dw`: per-cell factors
/// `δ_Γ(x_T)^{−p} w_T |T|`. The rule underestimates the singular integral
/// on cells touching Γ.
#[derive(Clone, Debug)]
pub struct HardyForm {
    pub p: f64,
    pub factors: Vec<f64>,
}

impl HardyForm {
    pub fn new(model: &FeModel, gamma: &GammaSet) -> Result<Self, HardyError> {
        if gamma.is_empty() {
            return Err(HardyError::EmptyGamma);
        }
        let factors = model
            .mesh
            .geometry
            .iter()
            .zip(&model.cell_weight)
            .map(|(g, w)| gamma.distance(g.barycenter).powf(-model.p) * w * g.measure)
            .collect();
        Ok(Self { p: model.p, factors })
    }

    #[inline]
    fn cell_mean(mesh: &Mesh, t: usize, phi: &[f64]) -> f64 {
        let c = mesh.cell(t);
        c.iter().map(|&v| phi[v]).sum::<f64>() / c.len() as f64
    }

    /// `Σ_T |φ(x_T)|^p δ_Γ(x_T)^{−p} w_T |T|`.
    pub fn integral(&self, mesh: &Mesh, phi: &[f64]) -> f64 {
        self.factors
            .iter()
            .enumerate()
            .map(|(t, f)| Self::cell_mean(mesh, t, phi).abs().powf(self.p) * f)
            .sum()
    }

    /// Gradient of [`Self::integral`] with respect to the nodal values.
    pub fn gradient(&self, mesh: &Mesh, phi: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; mesh.n_nodes()];
        for (t, f) in self.factors.iter().enumerate() {
            let c = mesh.cell(t);
            let m = Self::cell_mean(mesh, t, phi);
            let d = self.p * m.abs().powf(self.p - 2.0) * m * f / c.len() as f64;
            if m != 0.0 {
                for &v in c {
                    g[v] += d;
                }
            }
        }
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyPair {
    pub lhs: f64,
    pub rhs: f64,
}

impl HardyPair {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

fn check_boundary(mesh: &Mesh, phi: &[f64]) -> Result<(), HardyError> {
    match (0..mesh.n_nodes()).find(|&i| mesh.boundary[i] && phi[i] != 0.0) {
        Some(node) => Err(HardyError::NonzeroOnBoundary { node, value: phi[node] }),
        None => Ok(()),
    }
}

/// `(c ∫ |φ|^p δ^{−p} dw, ∫ |∇φ|^p dw)` for `φ` vanishing on ∂Ω.
pub fn hardy_pair(model: &FeModel, form: &HardyForm, phi: &[f64], c: f64) -> Result<HardyPair, HardyError> {
    check_boundary(model.mesh, phi)?;
    Ok(HardyPair { lhs: c * form.integral(model.mesh, phi), rhs: model.p_energy(phi) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PiconeReport {
    /// `Σ_i φ_i^p ν_i / s_i^{p−1}`.
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Residual measure of a barrier with zero source, computed once per sweep.
pub fn barrier_measure(model: &FeModel, s: &[f64]) -> Result<Vec<f64>, HardyError> {
    let mesh = model.mesh;
    if let Some(node) = (0..mesh.n_nodes()).find(|&i| !mesh.boundary[i] && s[i] <= 0.0) {
        return Err(HardyError::NonpositiveBarrier { node, value: s[node] });
    }
    Ok(residual_measure(model, s, &vec![0.0; mesh.n_nodes()])?.nu)
}

/// `Σ_i φ_i^p ν_i / s_i^{p−1} ≤ ∫ |∇φ|^p dw + 10⁻⁶ RHS` with `ν` the
/// residual measure of `s` from [`barrier_measure`].
pub fn picone_check(model: &FeModel, phi: &[f64], s: &[f64], nu: &[f64]) -> Result<PiconeReport, HardyError> {
    let mesh = model.mesh;
    check_boundary(mesh, phi)?;
    if let Some(i) = phi.iter().position(|&v| v < 0.0) {
        return Err(HardyError::Negative(i));
    }
    let p = model.p;
    let lhs = (0..mesh.n_nodes())
        .filter(|&i| !mesh.boundary[i] && phi[i] > 0.0)
        .map(|i| {
            if s[i] <= 0.0 {
                return Err(HardyError::NonpositiveBarrier { node: i, value: s[i] });
            }
            Ok(phi[i].powf(p) * nu[i] / s[i].powf(p - 1.0))
        })
        .sum::<Result<f64, _>>()?;
    let rhs = model.p_energy(phi);
    let slack = 1e-6 * rhs;
    Ok(PiconeReport { lhs, rhs, slack, passed: lhs <= rhs + slack })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BestConstantSettings {
    pub starts: usize,
    pub max_iterations: usize,
    /// Stop a start once the quotient decreases by less than this fraction.
    pub rel_decrease: f64,
    pub solver: SolverSettings,
}

impl Default for BestConstantSettings {
    fn default() -> Self {
        Self { starts: 5, max_iterations: 60, rel_decrease: 1e-6, solver: SolverSettings::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BestConstant {
    pub c_hat: f64,
    /// Quotient after each iteration, per start.
    pub history: Vec<Vec<f64>>,
    /// Minimizing field, normalized to unit Hardy integral.
    #[serde(skip)]
    pub field: Vec<f64>,
}

/// `∫ |∇φ|^p dw / ∫ |φ|^p δ^{−p} dw`.
pub fn hardy_quotient(model: &FeModel, form: &HardyForm, phi: &[f64]) -> f64 {
    model.p_energy(phi) / form.integral(model.mesh, phi)
}

/// Upper estimate of the best Hardy constant by nonlinear inverse iteration:
/// `u_{k+1}` minimizes `∫|∇u|^p dw / p − ⟨u, ∇D(φ_k)⟩ / p` with zero boundary
/// values, then `φ_{k+1} = u_{k+1} / D(u_{k+1})^{1/p}`, where `D` is the
/// Hardy integral. The quotient never increases along the iteration.
/// Starts are positive seeded random fields; the result is deterministic in
/// `seed`.
pub fn estimate_best_constant(
    model: &FeModel,
    form: &HardyForm,
    seed: u64,
    settings: &BestConstantSettings,
) -> Result<BestConstant, HardyError> {
    let mesh = model.mesh;
    let n = mesh.n_nodes();
    let p = model.p;
    let runs: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..settings.starts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let mut phi: Vec<f64> =
                (0..n).map(|i| if mesh.boundary[i] { 0.0 } else { rng.gen_range(0.1..1.0) }).collect();
            let d = form.integral(mesh, &phi);
            if !(d > 0.0 && d.is_finite()) {
                return Err(HardyError::DegenerateStart);
            }
            phi.iter_mut().for_each(|v| *v /= d.powf(1.0 / p));
            let mut best = (model.p_energy(&phi), phi.clone());
            let mut history = vec![best.0];
            for _ in 0..settings.max_iterations {
                let g = form.gradient(mesh, &phi);
                let rho: Vec<f64> =
                    (0..n).map(|i| if model.mass[i] > 0.0 { g[i] / (p * model.mass[i]) } else { 0.0 }).collect();
                let u = solve_dirichlet(model, &rho, &mesh.boundary, phi.clone(), &settings.solver)?.u;
                let d = form.integral(mesh, &u);
                if !(d > 0.0 && d.is_finite()) {
                    return Err(HardyError::DegenerateStart);
                }
                phi = u.iter().map(|v| v / d.powf(1.0 / p)).collect();
                let q = model.p_energy(&phi);
                history.push(q);
                let prev = best.0;
                if q < best.0 {
                    best = (q, phi.clone());
                }
                if prev - q < settings.rel_decrease * prev {
                    break;
                }
            }
            Ok((best.0, best.1, history))
        })
        .collect::<Result<_, _>>()?;
    let (i, _) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("at least one start");
    let history = runs.iter().map(|r| r.2.clone()).collect();
    let (c_hat, field, _) = runs.into_iter().nth(i).expect("index in range");
    Ok(BestConstant { c_hat, history, field })
}

/// Geometrically graded nodes on `(0, 1)`: spacing `first` at both ends,
/// growing by `ratio` towards the midpoint.
pub fn graded_interval(first: f64, ratio: f64) -> Vec<f64> {
    let mut half = vec![0.0];
    let mut step = first;
    while half.last().copied().unwrap_or(0.0) + step < 0.5 {
        half.push(half.last().copied().unwrap_or(0.0) + step);
        step *= ratio;
    }
    let mut xs = half.clone();
    if 0.5 - xs[xs.len() - 1] > 0.25 * step {
        xs.push(0.5);
    }
    xs.extend(half.iter().rev().map(|x| 1.0 - x));
    xs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Bubble,
    BarrierShaped,
    Random,
}

#[derive(Clone, Debug, Serialize)]
pub struct TestFunction {
    pub id: usize,
    pub family: Family,
    pub label: String,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// At least 50 nonnegative test functions vanishing on ∂Ω: distance bubbles
/// `d^a (1 + sin(·)/2)`, barrier-shaped `s_Γ d^a` and seeded random fields.
pub fn sweep_functions(mesh: &Mesh, s_gamma: &[f64], seed: u64) -> Vec<TestFunction> {
    let outer = GammaSet::new(mesh.walk.clone());
    let n = mesh.n_nodes();
    let d: Vec<f64> = (0..n).map(|i| if mesh.boundary[i] { 0.0 } else { outer.distance(mesh.nodes[i]) }).collect();
    let mut out = Vec::new();
    let mut push = |family, label: String, values: Vec<f64>| {
        let id = out.len();
        out.push(TestFunction { id, family, label, values });
    };
    let tau = std::f64::consts::TAU;
    for a in [1.0, 1.5, 2.0, 3.0] {
        for (kx, ky) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 2.0)] {
            let values = (0..n)
                .map(|i| {
                    let x = mesh.nodes[i];
                    d[i].powf(a) * (1.0 + 0.5 * (tau * (kx * x[0] + ky * x[1]) + 0.3 * a).sin())
                })
                .collect();
            push(Family::Bubble, format!("d^{a} mode ({kx},{ky})"), values);
        }
    }
    for a in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let values = (0..n).map(|i| s_gamma[i] * d[i].powf(a)).collect();
        push(Family::BarrierShaped, format!("s_gamma d^{a}"), values);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..20 {
        let values = (0..n).map(|i| if mesh.boundary[i] { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
        push(Family::Random, format!("random #{r}"), values);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub id: usize,
    pub family: Family,
    pub label: String,
    pub hardy: HardyPair,
    pub picone: PiconeReport,
    /// `c_H ∫ φ^p δ^{−p} dw ≤ Picone LHS + slack`.
    pub chain: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HardyReport {
    pub c_h: f64,
    /// The barycenter rule underestimates `∫ |φ|^p δ^{−p} dw`.
    pub quadrature_bias: &'static str,
    pub records: Vec<SweepRecord>,
    pub hardy_violations: usize,
    pub picone_violations: usize,
    pub chain_violations: usize,
    pub best: Option<BestConstant>,
    /// `c_H ≤ ĉ (1 + 10⁻²)`.
    pub ordering: Option<bool>,
    pub passed: bool,
}

impl HardyReport {
    pub fn table_csv(&self) -> String {
        let mut s = String::from("id,family,lhs,rhs,margin,picone_lhs,picone_passed,chain\n");
        for r in &self.records {
            s += &format!(
                "{},{:?},{},{},{},{},{},{}\n",
                r.id,
                r.family,
                r.hardy.lhs,
                r.hardy.rhs,
                r.hardy.rhs - r.hardy.lhs,
                r.picone.lhs,
                r.picone.passed as u8,
                r.chain as u8
            );
        }
        s
    }
}

/// Runs the sweep with `c = c_H` through both routes and, when settings are
/// given, the best-constant estimate.
pub fn hardy_certificate(
    model: &FeModel,
    gamma: &GammaSet,
    s_gamma: &[f64],
    c_h: f64,
    seed: u64,
    best: Option<&BestConstantSettings>,
) -> Result<HardyReport, HardyError> {
    let form = HardyForm::new(model, gamma)?;
    let nu = barrier_measure(model, s_gamma)?;
    let functions = sweep_functions(model.mesh, s_gamma, seed);
    let records: Vec<SweepRecord> = functions
        .par_iter()
        .map(|f| {
            let hardy = hardy_pair(model, &form, &f.values, c_h)?;
            let picone = picone_check(model, &f.values, s_gamma, &nu)?;
            let chain = hardy.lhs <= picone.lhs + picone.slack;
            Ok(SweepRecord { id: f.id, family: f.family, label: f.label.clone(), hardy, picone, chain })
        })
        .collect::<Result<_, HardyError>>()?;
    let best = best.map(|s| estimate_best_constant(model, &form, seed, s)).transpose()?;
    let ordering = best.as_ref().map(|b| c_h <= b.c_hat * (1.0 + 1e-2));
    let hardy_violations = records.iter().filter(|r| !r.hardy.holds()).count();
    let picone_violations = records.iter().filter(|r| !r.picone.passed).count();
    let chain_violations = records.iter().filter(|r| !r.chain).count();
    let passed = hardy_violations == 0 && picone_violations == 0 && chain_violations == 0 && ordering != Some(false);
    Ok(HardyReport {
        c_h,
        quadrature_bias: "underestimate",
        records,
        hardy_violations,
        picone_violations,
        chain_violations,
        best,
        ordering,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec};
    use crate::operators::Operator;

    fn interval_model(mesh: &Mesh, p: f64) -> FeModel<'_> {
        FeModel::new(mesh, &Operator::p_laplacian(p).unwrap()).unwrap()
    }

    #[test]
    fn one_dimensional_pair() {
        let m = build_mesh(&DomainSpec::unit_interval(), 1.0 / 1024.0).unwrap();
        let model = interval_model(&m, 2.0);
        let form = HardyForm::new(&model, &m.gamma_set()).unwrap();
        let phi: Vec<f64> = m.nodes.iter().map(|x| x[0] * (1.0 - x[0])).collect();
        let pair = hardy_pair(&model, &form, &phi, 0.25).unwrap();
        // ∫ x²(1−x)²/min(x,1−x)² = 7/12 and ∫ (1−2x)² = 1/3.
        assert!((pair.lhs - 0.25 * 7.0 / 12.0).abs() < 1e-4);
        assert!((pair.rhs - 1.0 / 3.0).abs() < 1e-5);
        assert!(pair.holds());
        let zero = hardy_pair(&model, &form, &vec![0.0; m.n_nodes()], 0.25).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
        let twice: Vec<f64> = phi.iter().map(|v| 2.0 * v).collect();
        let p2 = hardy_pair(&model, &form, &twice, 0.25).unwrap();
        assert!((p2.lhs / p2.rhs - pair.lhs / pair.rhs).abs() < 1e-12);
        let mut bad = phi.clone();
        bad[0] = 1.0;
        assert!(matches!(hardy_pair(&model, &form, &bad, 0.25), Err(HardyError::NonzeroOnBoundary { .. })));
    }

    #[test]
    fn graded_nodes_are_symmetric() {
        let xs = graded_interval(1e-6, 1.2);
        assert_eq!(xs[0], 0.0);
        assert_eq!(*xs.last().unwrap(), 1.0);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        for (a, b) in xs.iter().zip(xs.iter().rev()) {
            assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_iteration_is_monotone_and_deterministic() {
        let m = Mesh::interval_from_nodes(&graded_interval(1e-6, 1.2), vec![0, 1]).unwrap();
        let model = interval_model(&m, 2.0);
        let form = HardyForm::new(&model, &m.gamma_set()).unwrap();
        let s = BestConstantSettings { starts: 2, max_iterations: 15, ..Default::default() };
        let a = estimate_best_constant(&model, &form, 3, &s).unwrap();
        let b = estimate_best_constant(&model, &form, 3, &s).unwrap();
        assert_eq!(a.c_hat, b.c_hat);
        for h in &a.history {
            for w in h.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-9));
            }
        }
        assert!((hardy_quotient(&model, &form, &a.field) - a.c_hat).abs() < 1e-9 * a.c_hat);
    }

    #[test]
    fn picone_on_a_p2_supersolution() {
        let m = build_mesh(&DomainSpec::unit_square(), 1.0 / 16.0).unwrap();
        let model = interval_model(&m, 2.0);
        let n = m.n_nodes();
        let s: Vec<f64> = solve_dirichlet(&model, &vec![1.0; n], &m.boundary, vec![0.0; n], &SolverSettings::default())
            .unwrap()
            .u
            .iter()
            .map(|v| v + 0.1)
            .collect();
        let nu = barrier_measure(&model, &s).unwrap();
        for f in sweep_functions(&m, &s, 5) {
            let phi = f.values;
            let r = picone_check(&model, &phi, &s, &nu).unwrap();
            assert!(r.passed, "{} {:?}", f.label, r);
        }
        let mut neg = vec![0.0; n];
        let i = (0..n).find(|&i| !m.boundary[i]).unwrap();
        neg[i] = -1.0;
        assert!(matches!(picone_check(&model, &neg, &s, &nu), Err(HardyError::Negative(_))));
        let zero = vec![0.0; n];
        assert!(matches!(barrier_measure(&model, &zero), Err(HardyError::NonpositiveBarrier { .. })));
    }
}
