use serde::Serialize;

use crate::geometry::Point;

/// `α` with `(θ/2)^α = 3/4`.
pub fn alpha_of(theta: f64) -> f64 {
    (4.0f64 / 3.0).ln() / (2.0 / theta).ln()
}

/// `c_H = {(5/4)(4/3)⁵}^{1−p} (θ/2)^{6p} c₃`.
pub fn c_h_of(theta: f64, c3: f64, p: f64) -> f64 {
    (1.25 * (4.0f64 / 3.0).powi(5)).powf(1.0 - p) * (0.5 * theta).powf(6.0 * p) * c3
}

/// Which auxiliary-function bound a probe violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Breach {
    /// Minimum below 1/4.
    Low,
    /// Maximum above 5/4.
    High,
    /// Value above 1/2 inside the θ-ball.
    Decay,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub k: i32,
    pub center: Point,
    pub radius: f64,
    pub min: f64,
    pub max: f64,
    /// Largest value on nodes of the closed θ-ball; `-∞` if it holds no node.
    pub inner_max: f64,
    pub breach: Option<Breach>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationAttempt {
    pub theta: f64,
    pub c3: f64,
    pub probes: usize,
    pub passed: bool,
    pub first_breach: Option<ProbeRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibratedConstants {
    pub p: f64,
    pub theta: f64,
    /// Source level after the safety margin.
    pub c3: f64,
    /// Grid value that passed calibration.
    pub c3_grid: f64,
    pub alpha: f64,
    pub c_h: f64,
    /// Probe records of the final (margin-applied) solves.
    pub evidence: Vec<ProbeRecord>,
    pub attempts: Vec<CalibrationAttempt>,
}

impl CalibratedConstants {
    pub fn new(p: f64, theta: f64, c3_grid: f64, margin: f64) -> Self {
        let c3 = margin * c3_grid;
        Self {
            p,
            theta,
            c3,
            c3_grid,
            alpha: alpha_of(theta),
            c_h: c_h_of(theta, c3, p),
            evidence: Vec::new(),
            attempts: Vec::new(),
        }
    }

    /// Whether the stored α and c_H equal their closed forms bit for bit.
    pub fn formulas_match(&self) -> bool {
        self.alpha == alpha_of(self.theta) && self.c_h == c_h_of(self.theta, self.c3, self.p)
    }

    pub fn evidence_csv(&self) -> String {
        let mut s = String::from("k,x,y,radius,min,max,inner_max,breach\n");
        for r in &self.evidence {
            let b = r.breach.map(|b| format!("{b:?}")).unwrap_or_default();
            s += &format!(
                "{},{},{},{},{},{},{},{}\n",
                r.k, r.center[0], r.center[1], r.radius, r.min, r.max, r.inner_max, b
            );
        }
        s
    }
}
