use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auxiliary_function, AuxField, BarrierError, CalibratedConstants, CalibrationAttempt, ProbeRecord};
use crate::geometry::{build_ladder, DistanceField, Scale, ScaleLadder};
use crate::solver::{FeModel, SolverSettings};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSettings {
    /// Candidate decay scales, tried in order.
    pub theta_grid: Vec<f64>,
    /// Candidate source levels relative to `c3_base`, tried in order for each θ.
    pub c3_grid: Vec<f64>,
    pub c3_base: f64,
    /// Factor applied to the passing grid value of c₃.
    pub margin: f64,
    /// Reference length with `R_k = (θ/2)^k r_ref`.
    pub r_ref: f64,
    pub solver: SolverSettings,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self {
            theta_grid: vec![0.5, 0.25, 0.125, 0.0625],
            c3_grid: vec![1.0, 0.1, 0.01, 0.001],
            c3_base: 1.0,
            margin: 0.9,
            r_ref: 1.0,
            solver: SolverSettings { tolerance: 1e-11, ..SolverSettings::default() },
        }
    }
}

/// Calibrated constants with the ladder and the auxiliary solutions at the
/// final source level.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub constants: CalibratedConstants,
    pub ladder: ScaleLadder,
    pub aux: Vec<Vec<AuxField>>,
}

enum Stop {
    Breach(Box<ProbeRecord>),
    Failed(BarrierError),
}

/// Auxiliary functions for every covering center of one scale.
pub fn solve_scale(
    model: &FeModel,
    scale: &Scale,
    c3: f64,
    settings: &SolverSettings,
) -> Result<Vec<AuxField>, BarrierError> {
    scale
        .centers
        .par_iter()
        .map(|&c| auxiliary_function(model, scale.k, c, scale.radius, c3, settings))
        .collect()
}

/// Solves all probes finest scale first and stops after the first scale
/// with a breach.
fn probe_ladder(
    model: &FeModel,
    ladder: &ScaleLadder,
    c3: f64,
    settings: &SolverSettings,
) -> Result<(Vec<Vec<AuxField>>, Vec<ProbeRecord>), Stop> {
    let theta = ladder.theta;
    let nodes = &model.mesh.nodes;
    let mut aux = Vec::with_capacity(ladder.scales.len());
    let mut records = Vec::new();
    for scale in ladder.scales.iter().rev() {
        // Collected in full so the reported breach does not depend on
        // thread scheduling.
        let solved: Vec<Result<(AuxField, ProbeRecord), Stop>> = scale
            .centers
            .par_iter()
            .map(|&c| {
                let u = auxiliary_function(model, scale.k, c, scale.radius, c3, settings).map_err(Stop::Failed)?;
                let rec = u.probe(nodes, theta);
                match rec.breach {
                    Some(_) => Err(Stop::Breach(Box::new(rec))),
                    None => Ok((u, rec)),
                }
            })
            .collect();
        let solved: Vec<(AuxField, ProbeRecord)> = solved.into_iter().collect::<Result<_, _>>()?;
        let (fields, recs): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
        aux.push(fields);
        records.extend(recs);
    }
    aux.reverse();
    Ok((aux, records))
}

/// Grid search for `(θ, c₃)`: the first pair whose auxiliary functions at
/// every covering center of every resolved scale satisfy `1/4 ≤ u_B ≤ 5/4`
/// and `u_B ≤ 1/2` on the θ-ball. The returned c₃ carries the safety margin
/// and its solves are re-verified.
pub fn calibrate(model: &FeModel, delta: &DistanceField, settings: &BarrierSettings) -> Result<Calibration, BarrierError> {
    if settings.theta_grid.is_empty() || settings.c3_grid.is_empty() {
        return Err(BarrierError::EmptyGrid);
    }
    let mut attempts = Vec::new();
    for &theta in &settings.theta_grid {
        let ladder = build_ladder(model.mesh, delta, theta, settings.r_ref)?;
        let probes: usize = ladder.scales.iter().map(|s| s.centers.len()).sum();
        for &rel in &settings.c3_grid {
            let c3 = rel * settings.c3_base;
            match probe_ladder(model, &ladder, c3, &settings.solver) {
                Err(Stop::Failed(e)) => return Err(e),
                Err(Stop::Breach(rec)) => attempts.push(CalibrationAttempt {
                    theta,
                    c3,
                    probes,
                    passed: false,
                    first_breach: Some(*rec),
                }),
                Ok(_) => {
                    attempts.push(CalibrationAttempt { theta, c3, probes, passed: true, first_breach: None });
                    let mut constants = CalibratedConstants::new(model.p, theta, c3, settings.margin);
                    let (aux, evidence) = match probe_ladder(model, &ladder, constants.c3, &settings.solver) {
                        Ok(v) => v,
                        Err(Stop::Failed(e)) => return Err(e),
                        Err(Stop::Breach(rec)) => {
                            return Err(BarrierError::Breach {
                                center: rec.center,
                                radius: rec.radius,
                                breach: rec.breach.expect("breach record"),
                            })
                        }
                    };
                    constants.evidence = evidence;
                    constants.attempts = attempts;
                    return Ok(Calibration { constants, ladder, aux });
                }
            }
        }
    }
    Err(BarrierError::CalibrationFailure { attempts: attempts.len() })
}
