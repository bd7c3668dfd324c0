use serde::Serialize;

use super::{calibrate, AuxField, BarrierError, BarrierSettings, CalibratedConstants, Calibration, PowerTransform};
use crate::geometry::{DistanceField, ScaleLadder};
use crate::solver::{glue_min, Branch, FeModel, GlueReport};

impl Branch for AuxField {
    fn value(&self, i: usize) -> f64 {
        AuxField::value(self, i)
    }
    fn rho(&self, _: usize) -> f64 {
        self.rho
    }
    fn covers(&self, i: usize) -> bool {
        self.is_free(i)
    }
}

/// `v_k`: nodal minimum of the scale-k auxiliary functions.
#[derive(Clone, Debug, Serialize)]
pub struct Layer {
    pub k: i32,
    pub radius: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Nodes inside some open ball of the scale.
    #[serde(skip)]
    pub in_d: Vec<bool>,
    /// Supersolution check of `v_k` with density `c₃ R_k^{−p}` on `D_k`.
    pub glue: GlueReport,
    pub min: f64,
    pub max: f64,
    /// Largest value on `E_{k+1}`.
    pub next_max: f64,
    /// Whether `v_k = 1` at every node outside `D_k`.
    pub unit_off_d: bool,
}

pub fn layer_function(model: &FeModel, delta: &DistanceField, next_radius: f64, aux: &[AuxField]) -> Layer {
    let n = model.mesh.n_nodes();
    let (k, radius) = aux.first().map_or((0, 0.0), |a| (a.k, a.radius));
    let mut in_d = vec![false; n];
    for a in aux {
        for &i in &a.nodes {
            in_d[i] = true;
        }
    }
    let branches: Vec<&dyn Branch> = aux.iter().map(|a| a as &dyn Branch).collect();
    let (values, glue) = glue_min(model, &branches, Some(&in_d));
    let values: Vec<f64> = if aux.is_empty() { vec![1.0; n] } else { values };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let next_max = (0..n)
        .filter(|&i| delta.values[i] <= next_radius)
        .map(|i| values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let unit_off_d = (0..n).all(|i| in_d[i] || values[i] == 1.0);
    Layer { k, radius, values, in_d, glue, min, max, next_max, unit_off_d }
}

/// One auxiliary function of scale k, scaled by `4 (3/4)^k`, set to `+∞`
/// off `E_k`, and optionally passed through a power transform.
pub struct LayerBranch<'a> {
    pub aux: &'a AuxField,
    /// `(3/4)^k`.
    pub pow: f64,
    pub layer: &'a [bool],
    pub rho: &'a [f64],
    pub map: Option<PowerTransform>,
}

impl LayerBranch<'_> {
    #[inline]
    fn scaled(&self, i: usize) -> f64 {
        let s = 4.0 * (self.pow * self.aux.value(i));
        self.map.map_or(s, |g| g.apply(s))
    }
}

impl Branch for LayerBranch<'_> {
    fn value(&self, i: usize) -> f64 {
        if self.layer[i] {
            self.scaled(i)
        } else {
            f64::INFINITY
        }
    }
    fn rho(&self, i: usize) -> f64 {
        self.rho[i]
    }
    fn covers(&self, i: usize) -> bool {
        self.aux.is_free(i)
    }
    fn raw(&self, i: usize) -> f64 {
        self.scaled(i)
    }
}

/// The assembled barrier and everything it was built from.
#[derive(Clone, Debug, Serialize)]
pub struct BarrierLadder {
    pub constants: CalibratedConstants,
    pub ladder: ScaleLadder,
    #[serde(skip)]
    pub aux: Vec<Vec<AuxField>>,
    pub layers: Vec<Layer>,
    #[serde(skip)]
    pub delta: Vec<f64>,
    /// `s = min_k (3/4)^k ṽ_k`.
    #[serde(skip)]
    pub s: Vec<f64>,
    /// `s_Γ = 4s`.
    #[serde(skip)]
    pub s_gamma: Vec<f64>,
    /// Largest computed k with `δ ≤ R_k` at each node.
    #[serde(skip)]
    pub node_scale: Vec<i32>,
    /// Nodes with `δ ≥ R_{k_hi+1}`.
    #[serde(skip)]
    pub resolved: Vec<bool>,
    /// Resolved nodes where the window identity was checked.
    pub window_checked: usize,
}

impl BarrierLadder {
    /// `(3/4)^k`.
    pub fn weight_of(k: i32) -> f64 {
        0.75f64.powi(k)
    }

    /// Every auxiliary function as a branch of `s_Γ` (or of `g(s_Γ)`).
    pub fn branches<'a>(&'a self, rho: &'a [f64], map: Option<PowerTransform>) -> Vec<LayerBranch<'a>> {
        self.ladder
            .scales
            .iter()
            .zip(&self.aux)
            .flat_map(|(scale, fields)| {
                let pow = Self::weight_of(scale.k);
                fields.iter().map(move |aux| LayerBranch { aux, pow, layer: &scale.layer, rho, map })
            })
            .collect()
    }

    pub fn nodes_csv(&self, nodes: &[[f64; 2]]) -> String {
        let mut s = String::from("x,y,delta,s_gamma,scale,resolved\n");
        for (i, x) in nodes.iter().enumerate() {
            s += &format!(
                "{},{},{},{},{},{}\n",
                x[0], x[1], self.delta[i], self.s_gamma[i], self.node_scale[i], self.resolved[i] as u8
            );
        }
        s
    }
}

/// Forms the layers, the barrier `s_Γ` and checks node by node that the
/// minimum over all computed scales equals the minimum over the six-scale
/// window `k−5..k` of the node's band.
pub fn assemble_barrier(
    model: &FeModel,
    delta: &DistanceField,
    calibration: Calibration,
) -> Result<BarrierLadder, BarrierError> {
    let Calibration { constants, ladder, aux } = calibration;
    let n = model.mesh.n_nodes();
    let layers: Vec<Layer> = ladder
        .scales
        .iter()
        .zip(&aux)
        .map(|(scale, fields)| layer_function(model, delta, ladder.radius_of(scale.k + 1), fields))
        .collect();
    let node_scale: Vec<i32> = (0..n)
        .map(|i| {
            ladder
                .scales
                .iter()
                .rev()
                .find(|s| s.layer[i])
                .map_or(ladder.k_lo, |s| s.k)
        })
        .collect();
    let resolved = ladder.resolved_mask(delta);
    let scaled = |j: usize, i: usize| BarrierLadder::weight_of(ladder.scales[j].k) * layers[j].values[i];
    let mut s = vec![f64::INFINITY; n];
    let mut window_checked = 0;
    for i in 0..n {
        let mut full = f64::INFINITY;
        let mut window = f64::INFINITY;
        let k = node_scale[i];
        for (j, scale) in ladder.scales.iter().enumerate() {
            if !scale.layer[i] {
                continue;
            }
            let v = scaled(j, i);
            full = full.min(v);
            if scale.k >= k - 5 {
                window = window.min(v);
            }
        }
        if resolved[i] {
            window_checked += 1;
            if full != window {
                return Err(BarrierError::WindowMismatch { node: i, full, window });
            }
        }
        s[i] = full;
    }
    let s_gamma = s.iter().map(|v| 4.0 * v).collect();
    Ok(BarrierLadder {
        constants,
        ladder,
        aux,
        layers,
        delta: delta.values.clone(),
        s,
        s_gamma,
        node_scale,
        resolved,
        window_checked,
    })
}

/// Calibration followed by assembly.
pub fn construct_barrier(
    model: &FeModel,
    delta: &DistanceField,
    settings: &BarrierSettings,
) -> Result<BarrierLadder, BarrierError> {
    let cal = calibrate(model, delta, settings)?;
    assemble_barrier(model, delta, cal)
}
