//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::barrier::BarrierSettings;
use crate::geometry::{DomainSpec, Point};
use crate::hardy::BestConstantSettings;
use crate::operators::OperatorDescriptor;
use crate::singular::SourceSign;
use crate::solver::SolverSettings;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn positive<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(serde::de::Error::custom(format!("must be positive and finite, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(deserialize_with = "positive")]
    pub h: f64,
}

/// Constant-source Dirichlet problem with zero boundary values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub source: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { source: 1.0 }
    }
}

/// Condenser with plate `B̄(center, radius) ∩ Ω` in Ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub center: Point,
    pub radius: f64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self { center: [0.5, 0.5], radius: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdcConfig {
    pub radii: Vec<f64>,
    /// Centers placed at equal arclength along Γ.
    pub centers: usize,
    pub rings: usize,
    pub failure_threshold: f64,
}

impl Default for CdcConfig {
    fn default() -> Self {
        Self { radii: vec![0.1, 0.2], centers: 8, rings: 16, failure_threshold: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardyConfig {
    /// Run the best-constant estimate.
    pub best_constant: bool,
    pub best: BestConstantSettings,
}

impl Default for HardyConfig {
    fn default() -> Self {
        Self { best_constant: true, best: BestConstantSettings { max_iterations: 20, ..Default::default() } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingularConfig {
    pub amplitude: f64,
    /// Boundary exponent; defaults to `beta_fraction · α`.
    pub beta: Option<f64>,
    pub beta_fraction: f64,
    pub sign: SourceSign,
    pub stop_tol: f64,
    pub factor: f64,
    /// Cutoff factor of the second run used for the uniqueness probe.
    pub compare_factor: Option<f64>,
    pub max_cutoffs: usize,
}

impl Default for SingularConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            beta: None,
            beta_fraction: 1.0,
            sign: SourceSign::Positive,
            stop_tol: 1e-6,
            factor: 2.0,
            compare_factor: Some(3.0),
            max_cutoffs: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Required by the sampled operations (Hardy sweep and starts).
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub domain: DomainSpec,
    pub mesh: MeshConfig,
    pub operator: OperatorDescriptor,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub capacity: CapacityConfig,
    #[serde(default)]
    pub cdc: CdcConfig,
    #[serde(default)]
    pub barrier: BarrierSettings,
    #[serde(default)]
    pub hardy: HardyConfig,
    #[serde(default)]
    pub singular: SingularConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Schema {
            path: String::new(),
            message: e.to_string(),
        })?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |path: &str, message: String| Err(ConfigError::Schema { path: path.into(), message });
        self.domain.validate().map_err(|e| ConfigError::Schema { path: "domain".into(), message: e.to_string() })?;
        if !(self.capacity.radius > 0.0) {
            return bad("capacity.radius", format!("must be positive, got {}", self.capacity.radius));
        }
        if self.cdc.radii.iter().any(|r| !(*r > 0.0)) || self.cdc.radii.is_empty() {
            return bad("cdc.radii", "needs at least one positive radius".into());
        }
        if self.cdc.centers == 0 {
            return bad("cdc.centers", "must be at least 1".into());
        }
        let s = &self.singular;
        if !(s.amplitude > 0.0 && s.amplitude.is_finite()) {
            return bad("singular.amplitude", format!("must be positive, got {}", s.amplitude));
        }
        if !(s.beta_fraction > 0.0 && s.beta_fraction <= 1.0) {
            return bad("singular.beta_fraction", format!("must lie in (0, 1], got {}", s.beta_fraction));
        }
        if !(s.stop_tol > 0.0) {
            return bad("singular.stop_tol", format!("must be positive, got {}", s.stop_tol));
        }
        for (path, f) in [("singular.factor", Some(s.factor)), ("singular.compare_factor", s.compare_factor)] {
            if f.is_some_and(|f| !(f > 1.0)) {
                return bad(path, "must exceed 1".into());
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| ConfigError::Invalid("this command samples test functions and needs a seed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[domain]
kind = "polygon"
vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
gamma = "all"
[mesh]
h = 0.0625
[operator]
p = 2.0
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.mesh.h, 0.0625);
        assert_eq!(c.singular, SingularConfig::default());
        assert_eq!(c.require_seed().unwrap(), 7);
    }

    #[test]
    fn negative_h_names_the_field() {
        let text = MINIMAL.replace("h = 0.0625", "h = -0.1");
        let e = RunConfig::parse(&text).unwrap_err();
        assert!(e.to_string().contains("mesh.h"), "{e}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = MINIMAL.replace("p = 2.0", "p = 2.0\nq = 1");
        let e = RunConfig::parse(&text).unwrap_err();
        assert!(e.to_string().contains("operator"), "{e}");
    }
}
