use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::OperatorError;
use crate::geometry::{dist, GammaSet, Point};

/// The three supported weight families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightDescriptor {
    #[default]
    Constant,
    /// `|x − center|^mu`.
    PowerPoint { mu: f64, center: Point },
    /// `δ_Γ(x)^mu`.
    PowerGamma { mu: f64 },
}

impl WeightDescriptor {
    /// Whether the weight belongs to the admissible range for exponent `p` in
    /// dimension `n` (`A_p` power ranges; Γ assumed Lipschitz).
    pub fn admissible(&self, p: f64, n: usize) -> bool {
        let n = n as f64;
        match *self {
            WeightDescriptor::Constant => true,
            WeightDescriptor::PowerPoint { mu, .. } => -n < mu && mu < n * (p - 1.0),
            WeightDescriptor::PowerGamma { mu } => -1.0 < mu && mu < p - 1.0,
        }
    }
}

/// A weight ready for evaluation; distance weights carry their Γ.
#[derive(Clone, Debug)]
pub struct Weight {
    pub descriptor: WeightDescriptor,
    gamma: Option<Arc<GammaSet>>,
}

impl Weight {
    pub fn constant() -> Self {
        Self { descriptor: WeightDescriptor::Constant, gamma: None }
    }

    pub fn new(descriptor: WeightDescriptor, gamma: Option<GammaSet>) -> Result<Self, OperatorError> {
        if matches!(descriptor, WeightDescriptor::PowerGamma { .. }) && gamma.is_none() {
            return Err(OperatorError::MissingGamma);
        }
        Ok(Self { descriptor, gamma: gamma.map(Arc::new) })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.descriptor, WeightDescriptor::Constant)
    }

    pub fn eval(&self, x: Point) -> Result<f64, OperatorError> {
        match &self.descriptor {
            WeightDescriptor::Constant => Ok(1.0),
            WeightDescriptor::PowerPoint { mu, center } => power(dist(x, *center), *mu, x),
            WeightDescriptor::PowerGamma { mu } => {
                let g = self.gamma.as_ref().ok_or(OperatorError::MissingGamma)?;
                power(g.distance(x), *mu, x)
            }
        }
    }

    /// Value of a distance-power weight given the distance directly.
    pub fn eval_from_distance(&self, d: f64) -> Result<f64, OperatorError> {
        match &self.descriptor {
            WeightDescriptor::Constant => Ok(1.0),
            WeightDescriptor::PowerPoint { mu, .. } | WeightDescriptor::PowerGamma { mu } => {
                power(d, *mu, [f64::NAN; 2])
            }
        }
    }
}

fn power(d: f64, mu: f64, at: Point) -> Result<f64, OperatorError> {
    if d == 0.0 && mu < 0.0 {
        return Err(OperatorError::SingularEvaluation { mu, at });
    }
    Ok(if mu == 0.0 { 1.0 } else { d.powf(mu) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(Weight::constant().eval([0.3, 0.7]).unwrap(), 1.0);
        let w = Weight::new(WeightDescriptor::PowerPoint { mu: 1.0, center: [0.0, 0.0] }, None).unwrap();
        assert!((w.eval([0.3, 0.4]).unwrap() - 0.5).abs() < 1e-15);
        let g = GammaSet::new(vec![[[0.0, 0.0], [1.0, 0.0]]]);
        let w = Weight::new(WeightDescriptor::PowerGamma { mu: 0.5 }, Some(g)).unwrap();
        assert!((w.eval([0.5, 0.04]).unwrap() - 0.2).abs() < 1e-15);
        assert!((w.eval_from_distance(0.04).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn singular_point_is_an_error() {
        let w = Weight::new(WeightDescriptor::PowerPoint { mu: -0.5, center: [0.0, 0.0] }, None).unwrap();
        assert!(matches!(w.eval([0.0, 0.0]), Err(OperatorError::SingularEvaluation { .. })));
        assert!(Weight::new(WeightDescriptor::PowerGamma { mu: 0.5 }, None).is_err());
    }

    #[test]
    fn admissible_ranges() {
        let pp = |mu| WeightDescriptor::PowerPoint { mu, center: [0.0, 0.0] };
        assert!(pp(-1.9).admissible(2.0, 2));
        assert!(!pp(-2.0).admissible(2.0, 2));
        assert!(pp(1.9).admissible(2.0, 2));
        assert!(!pp(2.0).admissible(2.0, 2));
        assert!(WeightDescriptor::PowerGamma { mu: 0.5 }.admissible(2.0, 2));
        assert!(!WeightDescriptor::PowerGamma { mu: 1.0 }.admissible(2.0, 2));
        assert!(!WeightDescriptor::PowerGamma { mu: -1.0 }.admissible(3.0, 2));
    }
}
