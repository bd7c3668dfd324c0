use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::operator::{energy, flux, sym_eigen};
use super::{Operator, OperatorError};
use crate::geometry::{norm, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Coercivity,
    Growth,
    Monotonicity,
    Homogeneity,
    EnergyConsistency,
}

/// A sample at which an axiom failed.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub x: Point,
    pub z: Point,
    /// Second vector (monotonicity) or `[t, 0]` (homogeneity).
    pub other: Point,
    pub margin: f64,
}

/// Worst relative margins per axiom (negative means violated) and the
/// witnesses of every violation.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub growth_constant: f64,
    pub coercivity: f64,
    pub growth: f64,
    pub monotonicity: f64,
    pub homogeneity: f64,
    pub energy_consistency: f64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self, axiom: Axiom) -> Option<&AxiomViolation> {
        self.violations.iter().find(|v| v.axiom == axiom)
    }
}

const ORDER_SLACK: f64 = 1e-12;
const HOMOGENEITY_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-4;

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Point {
    let r = (rng.gen_range(lo.ln()..hi.ln())).exp();
    if dim == 1 {
        return [if rng.gen_bool(0.5) { r } else { -r }, 0.0];
    }
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    [r * t.cos(), r * t.sin()]
}

/// Checks the structure axioms on `n_samples` seeded random draws of
/// `(x, z, z₁, z₂, t)` with `x` in `[lo, hi]²` (or on the segment in 1D).
/// Each sample also probes `z` along both eigenvectors of `M(x)`.
pub fn axiom_sampler(
    op: &Operator,
    dim: usize,
    bounds: [Point; 2],
    n_samples: usize,
    seed: u64,
) -> Result<AxiomReport, OperatorError> {
    if n_samples == 0 {
        return Err(OperatorError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = op.p;
    let l = op.growth_constant();
    let mut rep = AxiomReport {
        samples: n_samples,
        growth_constant: l,
        coercivity: f64::INFINITY,
        growth: f64::INFINITY,
        monotonicity: f64::INFINITY,
        homogeneity: f64::INFINITY,
        energy_consistency: f64::INFINITY,
        violations: Vec::new(),
    };
    let record = |rep: &mut AxiomReport, axiom, x, z, other, margin: f64, ok: bool| {
        let slot = match axiom {
            Axiom::Coercivity => &mut rep.coercivity,
            Axiom::Growth => &mut rep.growth,
            Axiom::Monotonicity => &mut rep.monotonicity,
            Axiom::Homogeneity => &mut rep.homogeneity,
            Axiom::EnergyConsistency => &mut rep.energy_consistency,
        };
        *slot = slot.min(margin);
        if !ok {
            rep.violations.push(AxiomViolation { axiom, x, z, other, margin });
        }
    };

    let mut drawn = 0;
    let mut attempts = 0;
    while drawn < n_samples {
        attempts += 1;
        if attempts > 100 * n_samples {
            break;
        }
        let x = [
            rng.gen_range(bounds[0][0]..=bounds[1][0]),
            if dim == 1 { 0.0 } else { rng.gen_range(bounds[0][1]..=bounds[1][1]) },
        ];
        let w = match op.weight.eval(x) {
            Ok(w) if w > 0.0 => w,
            // Resample points that hit a weight singularity or zero.
            _ => continue,
        };
        drawn += 1;
        let m = op.anisotropy.matrix(x);
        let z = random_vector(&mut rng, dim, 1e-3, 1e3);
        let mut probes = vec![z];
        if dim == 2 {
            let (_, vecs) = sym_eigen(m);
            let r = norm(z);
            probes.extend(vecs.iter().map(|v| [r * v[0], r * v[1]]));
        }
        for &zz in &probes {
            let a = flux(p, w, &m, zz);
            let az = a[0] * zz[0] + a[1] * zz[1];
            let lower = w * norm(zz).powf(p);
            let c = (az - lower) / lower;
            record(&mut rep, Axiom::Coercivity, x, zz, [0.0; 2], c, c >= -ORDER_SLACK);
            let upper = l * w * norm(zz).powf(p - 1.0);
            let g = (upper - norm(a)) / upper;
            record(&mut rep, Axiom::Growth, x, zz, [0.0; 2], g, g >= -ORDER_SLACK);
        }

        let z1 = random_vector(&mut rng, dim, 1e-3, 1e3);
        let z2 = if rng.gen_bool(0.5) {
            random_vector(&mut rng, dim, 1e-3, 1e3)
        } else {
            // Nearby pairs exercise strictness at small separations.
            let d = random_vector(&mut rng, dim, 1e-6, 1e-2);
            let s = norm(z1);
            [z1[0] + s * d[0], z1[1] + s * d[1]]
        };
        let dz = [z1[0] - z2[0], z1[1] - z2[1]];
        if norm(dz) >= 1e-6 {
            let (a1, a2) = (flux(p, w, &m, z1), flux(p, w, &m, z2));
            let prod = (a1[0] - a2[0]) * dz[0] + (a1[1] - a2[1]) * dz[1];
            let scale = (norm(a1) + norm(a2)) * norm(dz);
            let mm = prod / scale;
            record(&mut rep, Axiom::Monotonicity, x, z1, z2, mm, mm > -ORDER_SLACK);
        }

        let t = {
            let mag = rng.gen_range((1e-2f64).ln()..(1e2f64).ln()).exp();
            if rng.gen_bool(0.5) { mag } else { -mag }
        };
        let a = flux(p, w, &m, z);
        let at = flux(p, w, &m, [t * z[0], t * z[1]]);
        let f = t * t.abs().powf(p - 2.0);
        let err = norm([at[0] - f * a[0], at[1] - f * a[1]]);
        let bound = HOMOGENEITY_TOL * (1.0 + norm(a)) * t.abs().powf(p - 1.0);
        let hm = (bound - err) / bound;
        record(&mut rep, Axiom::Homogeneity, x, z, [t, 0.0], hm, err <= bound);

        let ze = random_vector(&mut rng, dim, 0.1, 10.0);
        let a = flux(p, w, &m, ze);
        let mut fd = [0.0; 2];
        for (k, fk) in fd.iter_mut().enumerate().take(dim) {
            let mut zp = ze;
            let mut zm = ze;
            zp[k] += FD_STEP;
            zm[k] -= FD_STEP;
            *fk = (energy(p, w, &m, zp) - energy(p, w, &m, zm)) / (2.0 * FD_STEP);
        }
        let a_proj = if dim == 1 { [a[0], 0.0] } else { a };
        let rel = norm([fd[0] - a_proj[0], fd[1] - a_proj[1]]) / norm(a_proj);
        let em = (FD_TOL - rel) / FD_TOL;
        record(&mut rep, Axiom::EnergyConsistency, x, ze, [0.0; 2], em, rel <= FD_TOL);
    }
    rep.samples = drawn;
    Ok(rep)
}
