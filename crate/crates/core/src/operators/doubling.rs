use serde::Serialize;

use super::{OperatorError, Weight};
use crate::geometry::{dist, Mesh, Point, Region};

#[derive(Clone, Debug, Serialize)]
pub struct BallSample {
    pub center: Point,
    pub radius: f64,
    /// `w(2B) / w(B)`.
    pub ratio: f64,
}

/// Measured doubling constant plus recorded (not measured) regularity data.
#[derive(Clone, Debug, Serialize)]
pub struct WeightDiagnostics {
    pub doubling: f64,
    pub samples: Vec<BallSample>,
    /// Poincaré constant and dilation `(C_P, λ)` if known from elsewhere.
    pub poincare: Option<(f64, f64)>,
    /// Sobolev gain exponent χ if known from elsewhere.
    pub sobolev_chi: Option<f64>,
}

/// Weighted measure of `B(c, r)` by barycenter quadrature on a uniform
/// subdivision of every mesh cell meeting the ball.
fn ball_mass(weight: &Weight, mesh: &Mesh, c: Point, r: f64) -> Result<f64, OperatorError> {
    let sub = ((mesh.h / (r / 40.0)).ceil() as usize).max(1);
    let mut total = 0.0;
    for t in 0..mesh.n_cells() {
        let v: Vec<Point> = mesh.cell(t).iter().map(|&i| mesh.nodes[i]).collect();
        if v.iter().all(|&p| dist(p, c) > r + mesh.h) {
            continue;
        }
        if mesh.dim == 1 {
            let len = (v[1][0] - v[0][0]) / sub as f64;
            for k in 0..sub {
                let x = [v[0][0] + (k as f64 + 0.5) * len, 0.0];
                if dist(x, c) < r {
                    total += weight.eval(x)? * len.abs();
                }
            }
            continue;
        }
        let area = mesh.geometry[t].measure / (sub * sub) as f64;
        let s = sub as f64;
        let at = |a: f64, b: f64| -> Point {
            [
                v[0][0] + a / s * (v[1][0] - v[0][0]) + b / s * (v[2][0] - v[0][0]),
                v[0][1] + a / s * (v[1][1] - v[0][1]) + b / s * (v[2][1] - v[0][1]),
            ]
        };
        for i in 0..sub {
            for j in 0..sub - i {
                let (a, b) = (i as f64, j as f64);
                // Upright sub-triangle, then the inverted one next to it.
                let mut bary = vec![at(a + 1.0 / 3.0, b + 1.0 / 3.0)];
                if i + j + 1 < sub {
                    bary.push(at(a + 2.0 / 3.0, b + 2.0 / 3.0));
                }
                for x in bary {
                    if dist(x, c) < r {
                        total += weight.eval(x)? * area;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// `Ĉ_D = max w(2B)/w(B)` over the sampled balls whose double lies in Ω.
pub fn measure_doubling(
    weight: &Weight,
    mesh: &Mesh,
    region: &dyn Region,
    balls: &[(Point, f64)],
) -> Result<WeightDiagnostics, OperatorError> {
    let mut samples = Vec::new();
    for &(c, r) in balls {
        let inside = region.contains(c)
            && mesh.walk.iter().all(|s| crate::geometry::point_segment_distance(c, s) >= 2.0 * r);
        if !inside {
            continue;
        }
        let small = ball_mass(weight, mesh, c, r)?;
        let big = ball_mass(weight, mesh, c, 2.0 * r)?;
        samples.push(BallSample { center: c, radius: r, ratio: big / small });
    }
    if samples.is_empty() {
        let radius = balls.iter().map(|b| b.1).fold(f64::NAN, f64::min);
        return Err(OperatorError::NoInteriorBall { radius });
    }
    let doubling = samples.iter().map(|s| s.ratio).fold(1.0, f64::max);
    Ok(WeightDiagnostics { doubling, samples, poincare: None, sobolev_chi: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainKind, DomainSpec, GammaSelector};
    use crate::operators::WeightDescriptor;

    #[test]
    fn constant_weight_area_ratio() {
        let spec = DomainSpec::unit_square();
        let m = build_mesh(&spec, 1.0 / 32.0).unwrap();
        let d = measure_doubling(&Weight::constant(), &m, &spec, &[([0.5, 0.5], 0.2), ([0.4, 0.55], 0.1)]).unwrap();
        for s in &d.samples {
            assert!((s.ratio - 4.0).abs() < 0.08, "{}", s.ratio);
        }
    }

    #[test]
    fn constant_weight_length_ratio_1d() {
        let spec = DomainSpec::unit_interval();
        let m = build_mesh(&spec, 1.0 / 64.0).unwrap();
        let d = measure_doubling(&Weight::constant(), &m, &spec, &[([0.5, 0.0], 0.2)]).unwrap();
        assert!((d.doubling - 2.0).abs() < 0.04);
    }

    #[test]
    fn radial_power_weight() {
        let spec = DomainSpec::new(
            DomainKind::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] },
            GammaSelector::All,
        );
        let m = build_mesh(&spec, 1.0 / 16.0).unwrap();
        let w = Weight::new(WeightDescriptor::PowerPoint { mu: 1.0, center: [0.0, 0.0] }, None).unwrap();
        let d = measure_doubling(&w, &m, &spec, &[([0.0, 0.0], 0.25)]).unwrap();
        assert!((d.doubling - 8.0).abs() < 0.4, "{}", d.doubling);
    }

    #[test]
    fn balls_touching_the_boundary_are_rejected() {
        let spec = DomainSpec::unit_square();
        let m = build_mesh(&spec, 0.1).unwrap();
        assert!(measure_doubling(&Weight::constant(), &m, &spec, &[([0.1, 0.5], 0.2)]).is_err());
    }
}
