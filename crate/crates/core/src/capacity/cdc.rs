use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{capacity, CapacityError};
use crate::geometry::mesh::disk_mesh;
use crate::geometry::{GammaSet, Point, Region};
use crate::operators::{Operator, Weight};
use crate::solver::{FeModel, SolverSettings};

/// Resolution of the ambient condenser meshes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdcSettings {
    /// Rings of the ambient disk mesh of `B(ξ, 2R)`; rounded up to even so
    /// that a ring lies exactly on `|x − ξ| = R`.
    pub rings: usize,
    /// Ratios below this value are reported as fatness failures.
    pub failure_threshold: f64,
    pub solver: SolverSettings,
}

impl Default for CdcSettings {
    fn default() -> Self {
        Self { rings: 16, failure_threshold: 1e-3, solver: SolverSettings::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CdcSample {
    pub xi: Point,
    pub radius: f64,
    /// Capacity of `B̄(ξ,R) ∖ Ω` in `B(ξ,2R)`.
    pub numerator: f64,
    /// Capacity of `B̄(ξ,R)` in `B(ξ,2R)`.
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CdcReport {
    pub samples: Vec<CdcSample>,
    pub gamma_hat: f64,
    pub radii: Vec<f64>,
    pub centers: Vec<Point>,
    /// Indices into `samples` with ratio below the failure threshold.
    pub failures: Vec<usize>,
}

impl CdcReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,radius,numerator,denominator,ratio\n");
        for r in &self.samples {
            s += &format!("{},{},{},{},{},{}\n", r.xi[0], r.xi[1], r.radius, r.numerator, r.denominator, r.ratio);
        }
        s
    }
}

/// `cap(B̄(ξ,R) ∖ Ω, B(ξ,2R)) / cap(B̄(ξ,R), B(ξ,2R))` on a ring mesh of
/// `B(ξ, 2R)` built independently of Ω's mesh. Nodes of the closed ball that
/// `region` does not contain form the numerator plate.
pub fn cdc_ratio(
    region: &dyn Region,
    xi: Point,
    radius: f64,
    p: f64,
    weight: &Weight,
    settings: &CdcSettings,
) -> Result<CdcSample, CapacityError> {
    let rings = settings.rings.max(4).div_ceil(2) * 2;
    let outer = 2.0 * radius;
    let walk: Vec<_> = (0..6 * rings)
        .map(|j| {
            let t = |j: usize| std::f64::consts::TAU * j as f64 / (6 * rings) as f64;
            let pt = |t: f64| [xi[0] + outer * t.cos(), xi[1] + outer * t.sin()];
            [pt(t(j)), pt(t(j + 1))]
        })
        .collect();
    let edges = (0..walk.len()).collect();
    let mesh = disk_mesh(xi, outer, rings, walk, edges, outer / rings as f64)?;
    let op = Operator::unchecked(p, weight.clone(), Default::default());
    let model = FeModel::new(&mesh, &op)?;
    let ball: Vec<bool> = mesh
        .nodes
        .iter()
        .map(|&x| crate::geometry::dist(x, xi) <= radius * (1.0 + 1e-12))
        .collect();
    let outside: Vec<bool> = (0..mesh.n_nodes()).map(|i| ball[i] && !region.contains(mesh.nodes[i])).collect();
    if !outside.iter().any(|&b| b) {
        return Err(CapacityError::EmptyComplement { xi, radius });
    }
    let numerator = capacity(&model, &outside, &settings.solver)?.capacity;
    let denominator = capacity(&model, &ball, &settings.solver)?.capacity;
    Ok(CdcSample { xi, radius, numerator, denominator, ratio: numerator / denominator })
}

/// Samples `cdc_ratio` at `n_centers` points spread by arclength over Γ and
/// every radius; `γ̂` is the smallest ratio.
pub fn estimate_gamma(
    gamma: &GammaSet,
    region: &dyn Region,
    radii: &[f64],
    n_centers: usize,
    p: f64,
    weight: &Weight,
    settings: &CdcSettings,
) -> Result<CdcReport, CapacityError> {
    if radii.is_empty() || n_centers == 0 || gamma.is_empty() {
        return Err(CapacityError::EmptySample);
    }
    let centers = gamma.arclength_points(n_centers);
    let jobs: Vec<(Point, f64)> = radii.iter().flat_map(|&r| centers.iter().map(move |&c| (c, r))).collect();
    let samples = jobs
        .par_iter()
        .map(|&(c, r)| cdc_ratio(region, c, r, p, weight, settings))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma_hat = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let failures = (0..samples.len()).filter(|&k| samples[k].ratio < settings.failure_threshold).collect();
    Ok(CdcReport { samples, gamma_hat, radii: radii.to_vec(), centers, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainKind, DomainSpec, GammaSelector};

    fn upper_half(x: Point) -> bool {
        x[1] > 0.0
    }

    #[test]
    fn half_plane_ratio_is_scale_invariant() {
        let s = CdcSettings::default();
        let w = Weight::constant();
        let r: Vec<f64> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&r| cdc_ratio(&upper_half, [0.3, 0.0], r, 2.0, &w, &s).unwrap().ratio)
            .collect();
        assert!(r[0] > 0.2 && r[0] < 1.0, "{r:?}");
        for v in &r {
            assert!((v / r[0] - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn empty_region_gives_unit_ratio() {
        let s = CdcSettings::default();
        let nothing = |_: Point| false;
        let r = cdc_ratio(&nothing, [0.0, 0.0], 0.3, 3.0, &Weight::constant(), &s).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn thin_complement_is_an_error() {
        let everything = |_: Point| true;
        let e = cdc_ratio(&everything, [0.0, 0.0], 0.3, 2.0, &Weight::constant(), &CdcSettings::default());
        assert!(matches!(e, Err(CapacityError::EmptyComplement { .. })));
    }

    #[test]
    fn square_boundary_is_fat() {
        let spec = DomainSpec::unit_square();
        let mesh = crate::geometry::build_mesh(&spec, 0.25).unwrap();
        let g = mesh.gamma_set();
        let s = CdcSettings::default();
        let w = Weight::constant();
        let a = estimate_gamma(&g, &spec, &[0.1, 0.2], 8, 2.0, &w, &s).unwrap();
        let b = estimate_gamma(&g, &spec, &[0.1, 0.2], 16, 2.0, &w, &s).unwrap();
        assert!(a.gamma_hat > 0.0 && a.failures.is_empty());
        assert!((b.gamma_hat / a.gamma_hat - 1.0).abs() < 0.15);
        let slit = DomainSpec::new(DomainKind::SlitSquare { size: 1.0 }, GammaSelector::Edges(vec![2, 3]));
        let m = crate::geometry::build_mesh(&slit, 0.25).unwrap();
        let r = estimate_gamma(&m.gamma_set(), &slit, &[0.1], 6, 2.0, &w, &s).unwrap();
        assert!(r.gamma_hat > 1e-3, "{}", r.gamma_hat);
    }
}
