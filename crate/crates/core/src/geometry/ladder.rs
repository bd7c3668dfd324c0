use serde::Serialize;

use super::{dist, DistanceField, GammaSet, GeometryError, Mesh, Point};

/// One rung of the ladder.
#[derive(Clone, Debug, Serialize)]
pub struct Scale {
    pub k: i32,
    pub radius: f64,
    /// Covering centers on Γ.
    pub centers: Vec<Point>,
    /// Largest number of open balls `B(ξ_j, R_k)` containing a single node.
    pub max_overlap: usize,
    /// Node mask of `E_k = {δ ≤ R_k}`.
    #[serde(skip)]
    pub layer: Vec<bool>,
}

/// Radii `R_k = (θ/2)^k R_ref` for `k_lo ≤ k ≤ k_hi` with their coverings.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleLadder {
    pub theta: f64,
    pub r_ref: f64,
    pub k_lo: i32,
    pub k_hi: i32,
    pub scales: Vec<Scale>,
}

impl ScaleLadder {
    pub fn radius_of(&self, k: i32) -> f64 {
        scale_radius(self.theta, self.r_ref, k)
    }

    pub fn scale(&self, k: i32) -> &Scale {
        &self.scales[(k - self.k_lo) as usize]
    }

    /// Lower edge of the region where verification is meaningful.
    pub fn resolved_radius(&self) -> f64 {
        self.radius_of(self.k_hi + 1)
    }

    /// Nodes with `δ ≥ R_{k_hi+1}`.
    pub fn resolved_mask(&self, delta: &DistanceField) -> Vec<bool> {
        let r = self.resolved_radius();
        delta.values.iter().map(|&d| d >= r).collect()
    }
}

pub(crate) fn scale_radius(theta: f64, r_ref: f64, k: i32) -> f64 {
    (theta / 2.0).powi(k) * r_ref
}

/// Greedy farthest-point net: picks sample points until every sample lies
/// within `radius` of a chosen center. Starts from the first sample, so the
/// output is a deterministic function of the sample order.
pub fn greedy_net(samples: &[Point], radius: f64) -> Vec<Point> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mut centers = vec![samples[0]];
    let mut gap: Vec<f64> = samples.iter().map(|&s| dist(s, samples[0])).collect();
    loop {
        let (far, &worst) = gap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if worst <= radius {
            break;
        }
        let c = samples[far];
        centers.push(c);
        for (g, &s) in gap.iter_mut().zip(samples) {
            *g = g.min(dist(s, c));
        }
    }
    centers
}

/// Covering of Γ whose `θR`-balls contain every point within `(θ/2)R` of Γ.
pub(crate) fn covering(gamma: &GammaSet, theta: f64, radius: f64) -> Vec<Point> {
    let spacing = 0.5 * theta * radius;
    let samples = gamma.sample(spacing / 8.0);
    greedy_net(&samples, 0.875 * spacing)
}

pub fn build_ladder(
    mesh: &Mesh,
    delta: &DistanceField,
    theta: f64,
    r_ref: f64,
) -> Result<ScaleLadder, GeometryError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(GeometryError::ThetaOutOfRange(theta));
    }
    let diam = mesh.diameter;
    if !(r_ref > 0.0 && r_ref.is_finite()) {
        return Err(GeometryError::InvalidReference(r_ref));
    }
    let gamma = mesh.gamma_set();
    if gamma.is_empty() {
        return Err(GeometryError::EmptyGamma);
    }
    let r = |k: i32| scale_radius(theta, r_ref, k);
    let mut k_lo = 0;
    while r(k_lo) < diam {
        k_lo -= 1;
    }
    while r(k_lo + 1) >= diam {
        k_lo += 1;
    }
    let min_r = 4.0 * mesh.h;
    if r(k_lo) < min_r {
        return Err(GeometryError::NoResolvableScales { largest: r(k_lo), min: min_r });
    }
    let mut k_hi = k_lo;
    while r(k_hi + 1) >= min_r {
        k_hi += 1;
    }
    let scales = (k_lo..=k_hi)
        .map(|k| {
            let radius = r(k);
            let centers = covering(&gamma, theta, radius);
            let max_overlap = mesh
                .nodes
                .iter()
                .map(|&x| centers.iter().filter(|&&c| dist(x, c) < radius).count())
                .max()
                .unwrap_or(0);
            let layer = delta.values.iter().map(|&d| d <= radius).collect();
            Scale { k, radius, centers, max_overlap, layer }
        })
        .collect();
    Ok(ScaleLadder { theta, r_ref, k_lo, k_hi, scales })
}
