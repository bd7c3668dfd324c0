use serde::{Deserialize, Serialize};

use super::{check_exponent, OperatorError, Weight, WeightDescriptor};
use crate::geometry::{GammaSet, Point};

pub type Mat2 = [[f64; 2]; 2];

/// The matrix field `M(x)`; eigenvalues lie in `[1, Λ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Anisotropy {
    #[default]
    Identity,
    Constant { matrix: Mat2 },
    /// `R(φ) diag(1, Λ) R(φ)ᵀ` with `φ = frequency · (x + y)`.
    Rotating { lambda: f64, frequency: f64 },
}

/// Eigenvalues (ascending) and unit eigenvectors of a symmetric 2×2 matrix.
pub(crate) fn sym_eigen(m: Mat2) -> ([f64; 2], [Point; 2]) {
    let (a, b, d) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (lo, hi) = (mean - r, mean + r);
    let phi = 0.5 * (2.0 * b).atan2(a - d);
    let v_hi = [phi.cos(), phi.sin()];
    let v_lo = [-phi.sin(), phi.cos()];
    ([lo, hi], [v_lo, v_hi])
}

impl Anisotropy {
    pub fn matrix(&self, x: Point) -> Mat2 {
        match *self {
            Anisotropy::Identity => [[1.0, 0.0], [0.0, 1.0]],
            Anisotropy::Constant { matrix } => matrix,
            Anisotropy::Rotating { lambda, frequency } => {
                let phi = frequency * (x[0] + x[1]);
                let (c, s) = (phi.cos(), phi.sin());
                [
                    [c * c + lambda * s * s, (1.0 - lambda) * c * s],
                    [(1.0 - lambda) * c * s, s * s + lambda * c * c],
                ]
            }
        }
    }

    /// Upper eigenvalue bound Λ.
    pub fn lambda(&self) -> f64 {
        match *self {
            Anisotropy::Identity => 1.0,
            Anisotropy::Constant { matrix } => sym_eigen(matrix).0[1],
            Anisotropy::Rotating { lambda, .. } => lambda,
        }
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        match *self {
            Anisotropy::Identity => Ok(()),
            Anisotropy::Constant { matrix } => {
                if matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(OperatorError::InvalidAnisotropy("has non-finite entries".into()));
                }
                if matrix[0][1] != matrix[1][0] {
                    return Err(OperatorError::InvalidAnisotropy("matrix is not symmetric".into()));
                }
                let lo = sym_eigen(matrix).0[0];
                if lo < 1.0 - 1e-12 {
                    return Err(OperatorError::InvalidAnisotropy(format!(
                        "smallest eigenvalue {lo} is below 1"
                    )));
                }
                Ok(())
            }
            Anisotropy::Rotating { lambda, frequency } => {
                if !(lambda >= 1.0 && lambda.is_finite() && frequency.is_finite()) {
                    return Err(OperatorError::InvalidAnisotropy(format!(
                        "rotating field needs finite lambda ≥ 1, got {lambda}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Serializable description of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDescriptor {
    pub p: f64,
    #[serde(default)]
    pub weight: WeightDescriptor,
    #[serde(default)]
    pub anisotropy: Anisotropy,
}

/// `A(x, z) = w(x) (M(x)z·z)^{(p−2)/2} M(x)z`.
#[derive(Clone, Debug)]
pub struct Operator {
    pub p: f64,
    pub weight: Weight,
    pub anisotropy: Anisotropy,
}

#[inline]
pub(crate) fn mat_vec(m: &Mat2, z: Point) -> Point {
    [m[0][0] * z[0] + m[0][1] * z[1], m[1][0] * z[0] + m[1][1] * z[1]]
}

/// Flux for a given weight value and matrix.
#[inline]
pub(crate) fn flux(p: f64, w: f64, m: &Mat2, z: Point) -> Point {
    let mz = mat_vec(m, z);
    let q = mz[0] * z[0] + mz[1] * z[1];
    if q == 0.0 {
        return [0.0, 0.0];
    }
    let s = w * q.powf(0.5 * (p - 2.0));
    [s * mz[0], s * mz[1]]
}

/// Energy density `w (Mz·z)^{p/2} / p`.
#[inline]
pub(crate) fn energy(p: f64, w: f64, m: &Mat2, z: Point) -> f64 {
    let mz = mat_vec(m, z);
    let q = mz[0] * z[0] + mz[1] * z[1];
    w * q.max(0.0).powf(0.5 * p) / p
}

impl Operator {
    pub fn new(desc: &OperatorDescriptor, gamma: Option<GammaSet>) -> Result<Self, OperatorError> {
        check_exponent(desc.p)?;
        desc.anisotropy.validate()?;
        let weight = Weight::new(desc.weight.clone(), gamma)?;
        Ok(Self { p: desc.p, weight, anisotropy: desc.anisotropy.clone() })
    }

    /// The unweighted p-Laplacian.
    pub fn p_laplacian(p: f64) -> Result<Self, OperatorError> {
        check_exponent(p)?;
        Ok(Self { p, weight: Weight::constant(), anisotropy: Anisotropy::Identity })
    }

    pub fn weighted(p: f64, weight: Weight) -> Result<Self, OperatorError> {
        check_exponent(p)?;
        Ok(Self { p, weight, anisotropy: Anisotropy::Identity })
    }

    /// Skips validation of the anisotropy; used to probe how the axiom
    /// sampler reports broken operators.
    pub fn unchecked(p: f64, weight: Weight, anisotropy: Anisotropy) -> Self {
        Self { p, weight, anisotropy }
    }

    pub fn descriptor(&self) -> OperatorDescriptor {
        OperatorDescriptor {
            p: self.p,
            weight: self.weight.descriptor.clone(),
            anisotropy: self.anisotropy.clone(),
        }
    }

    /// Growth constant `L = Λ^{p/2}`.
    pub fn growth_constant(&self) -> f64 {
        self.anisotropy.lambda().powf(0.5 * self.p)
    }

    pub fn eval(&self, x: Point, z: Point) -> Result<Point, OperatorError> {
        let w = self.weight.eval(x)?;
        Ok(flux(self.p, w, &self.anisotropy.matrix(x), z))
    }

    pub fn density(&self, x: Point, z: Point) -> Result<f64, OperatorError> {
        let w = self.weight.eval(x)?;
        Ok(energy(self.p, w, &self.anisotropy.matrix(x), z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = Operator::p_laplacian(2.0).unwrap();
        assert_eq!(a.eval([0.1, 0.2], [3.0, 4.0]).unwrap(), [3.0, 4.0]);
        let a = Operator::p_laplacian(3.0).unwrap();
        assert_eq!(a.eval([0.1, 0.2], [3.0, 4.0]).unwrap(), [15.0, 20.0]);
        let a = Operator::new(
            &OperatorDescriptor {
                p: 2.0,
                weight: WeightDescriptor::Constant,
                anisotropy: Anisotropy::Constant { matrix: [[1.0, 0.0], [0.0, 4.0]] },
            },
            None,
        )
        .unwrap();
        let v = a.eval([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert_eq!(v, [1.0, 4.0]);
        assert_eq!(v[0] + v[1], 5.0);
        assert_eq!(a.growth_constant(), 4.0);
    }

    #[test]
    fn zero_gradient_gives_zero_flux() {
        let a = Operator::p_laplacian(1.5).unwrap();
        assert_eq!(a.eval([0.0, 0.0], [0.0, 0.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn rotating_field_has_prescribed_spectrum() {
        let an = Anisotropy::Rotating { lambda: 4.0, frequency: 3.0 };
        let (ev, _) = sym_eigen(an.matrix([0.3, 0.2]));
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Operator::p_laplacian(1.0).is_err());
        let bad = Anisotropy::Constant { matrix: [[0.5, 0.0], [0.0, 2.0]] };
        assert!(bad.validate().is_err());
    }
}
