//! Subcommand orchestration: builds the mesh and operator from a
//! [`RunConfig`], runs the requested stages and collects checks, results and
//! CSV artifacts into a [`RunReport`].

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::barrier::{construct_barrier, transform_barrier, verify_barrier, BarrierError, BarrierLadder};
use crate::capacity::{capacity, estimate_gamma, CapacityError, CdcSettings};
use crate::config::{ConfigError, RunConfig};
use crate::geometry::{build_mesh, dist, distance_field, DistanceField, GeometryError, Mesh};
use crate::hardy::{hardy_certificate, HardyError};
use crate::operators::{Operator, OperatorError};
use crate::singular::{
    solve_singular, uniqueness_probe, verify_theorem_bound, CutoffSchedule, SingularError, SingularSource, SourceSign,
};
use crate::solver::{solve_dirichlet, FeModel, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Capacity,
    CdcCheck,
    Barrier,
    Hardy,
    SingularSolve,
    FullPipeline,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mesh: {0}")]
    Geometry(#[from] GeometryError),
    #[error("operator: {0}")]
    Operator(#[from] OperatorError),
    #[error("solve: {0}")]
    Solver(#[from] SolverError),
    #[error("capacity: {0}")]
    Capacity(#[from] CapacityError),
    #[error("barrier: {0}")]
    Barrier(#[from] BarrierError),
    #[error("hardy: {0}")]
    Hardy(#[from] HardyError),
    #[error("singular-solve: {0}")]
    Singular(#[from] SingularError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: Command,
    pub seed: Option<u64>,
    pub config: RunConfig,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Wall-clock seconds per stage; the only nondeterministic field.
    pub timing: BTreeMap<String, f64>,
}

impl RunReport {
    /// The report as JSON without the timing block.
    pub fn body(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("timing");
        }
        v
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    mesh: &'a Mesh,
    delta: &'a DistanceField,
    model: FeModel<'a>,
    op: &'a Operator,
    results: BTreeMap<String, Value>,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
    timing: BTreeMap<String, f64>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

impl Run<'_> {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    fn artifact(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact { name: name.into(), contents });
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T, PipelineError>) -> Result<T, PipelineError> {
        let t = Instant::now();
        let out = f(self);
        self.timing.insert(stage.into(), t.elapsed().as_secs_f64());
        out
    }

    fn solve(&mut self) -> Result<(), PipelineError> {
        let n = self.mesh.n_nodes();
        let rho = vec![self.cfg.solve.source; n];
        let sol = solve_dirichlet(&self.model, &rho, &self.mesh.boundary, vec![0.0; n], &self.cfg.solver)?;
        let max = sol.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.results.insert(
            "solve".into(),
            json!({
                "nodes": n,
                "energy": sol.energy,
                "residual": sol.residual,
                "tolerance": sol.tolerance,
                "iterations": sol.iterations,
                "max_abs": max,
            }),
        );
        self.check("solve.converged", sol.residual <= sol.tolerance, format!("{:e} ≤ {:e}", sol.residual, sol.tolerance));
        let mut csv = String::from("x,y,u\n");
        for (x, u) in self.mesh.nodes.iter().zip(&sol.u) {
            csv += &format!("{},{},{}\n", x[0], x[1], u);
        }
        self.artifact("solution.csv", csv);
        Ok(())
    }

    fn capacity(&mut self) -> Result<(), PipelineError> {
        let c = &self.cfg.capacity;
        let plate: Vec<bool> = (0..self.mesh.n_nodes())
            .map(|i| !self.mesh.boundary[i] && dist(self.mesh.nodes[i], c.center) <= c.radius * (1.0 + 1e-12))
            .collect();
        let r = capacity(&self.model, &plate, &self.cfg.solver)?;
        self.results.insert("capacity".into(), to_value(&r));
        self.check("capacity.positive", r.capacity > 0.0 && r.capacity.is_finite(), format!("{}", r.capacity));
        let mut csv = String::from("x,y,potential\n");
        for (x, u) in self.mesh.nodes.iter().zip(&r.potential) {
            csv += &format!("{},{},{}\n", x[0], x[1], u);
        }
        self.artifact("capacity_potential.csv", csv);
        Ok(())
    }

    fn cdc(&mut self) -> Result<(), PipelineError> {
        let c = &self.cfg.cdc;
        let settings =
            CdcSettings { rings: c.rings, failure_threshold: c.failure_threshold, solver: self.cfg.solver.clone() };
        let rep = estimate_gamma(
            &self.mesh.gamma_set(),
            &self.cfg.domain,
            &c.radii,
            c.centers,
            self.op.p,
            &self.op.weight,
            &settings,
        )?;
        self.check(
            "cdc.fat",
            rep.gamma_hat > 0.0 && rep.failures.is_empty(),
            format!("γ̂ = {}, {} samples below {}", rep.gamma_hat, rep.failures.len(), c.failure_threshold),
        );
        self.artifact("cdc.csv", rep.to_csv());
        self.results.insert("cdc".into(), to_value(&rep));
        Ok(())
    }

    fn barrier(&mut self) -> Result<BarrierLadder, PipelineError> {
        let b = construct_barrier(&self.model, self.delta, &self.cfg.barrier)?;
        let v = verify_barrier(&self.model, &b);
        let c = &b.constants;
        self.check("barrier.formulas", v.formulas_match, format!("α = {}, c_H = {:e}", c.alpha, c.c_h));
        self.check(
            "barrier.sandwich",
            v.sandwich.passed(),
            format!("{} of {} resolved nodes outside [δ^α, 30δ^α]", v.sandwich.violations.len(), v.sandwich.checked),
        );
        self.check("barrier.band_bounds", v.band_bounds.passed(), format!("{} violations", v.band_bounds.violations.len()));
        self.check("barrier.layer_bounds", v.layer_bounds, String::new());
        self.check(
            "barrier.supersolution",
            v.passed,
            format!(
                "pass fraction {:.5}, violations on interfaces: {}, mass ratio {:e}",
                v.pass_fraction, v.violations_on_interfaces, v.violation_mass_ratio
            ),
        );
        self.check("barrier.window", b.window_checked > 0, format!("{} nodes", b.window_checked));
        self.artifact("barrier_nodes.csv", b.nodes_csv(&self.mesh.nodes));
        self.artifact("calibration_evidence.csv", c.evidence_csv());
        self.results.insert(
            "barrier".into(),
            json!({
                "theta": c.theta,
                "c3": c.c3,
                "alpha": c.alpha,
                "c_h": c.c_h,
                "constants": to_value(c),
                "ladder": { "k_lo": b.ladder.k_lo, "k_hi": b.ladder.k_hi, "r_ref": b.ladder.r_ref },
                "verification": to_value(&v),
            }),
        );
        Ok(b)
    }

    fn hardy(&mut self, b: &BarrierLadder) -> Result<(), PipelineError> {
        let seed = self.cfg.require_seed()?;
        let h = &self.cfg.hardy;
        let best = h.best_constant.then_some(&h.best);
        let rep = hardy_certificate(&self.model, &self.mesh.gamma_set(), &b.s_gamma, b.constants.c_h, seed, best)?;
        let n = rep.records.len();
        self.check("hardy.sweep", rep.hardy_violations == 0, format!("{} of {n} functions violate", rep.hardy_violations));
        self.check("hardy.picone", rep.picone_violations == 0, format!("{} of {n}", rep.picone_violations));
        self.check("hardy.chain", rep.chain_violations == 0, format!("{} of {n}", rep.chain_violations));
        if let (Some(ok), Some(best)) = (rep.ordering, &rep.best) {
            self.check("hardy.ordering", ok, format!("c_H = {:e} ≤ ĉ = {}", rep.c_h, best.c_hat));
        }
        self.artifact("hardy.csv", rep.table_csv());
        self.results.insert("hardy".into(), to_value(&rep));
        Ok(())
    }

    fn singular(&mut self, b: &BarrierLadder) -> Result<(), PipelineError> {
        let s = &self.cfg.singular;
        let c = &b.constants;
        let beta = s.beta.unwrap_or(s.beta_fraction * c.alpha);
        let src = SingularSource { amplitude: s.amplitude, beta, sign: s.sign };
        let majorant = transform_barrier(&self.model, b, beta, s.amplitude)?;
        self.check(
            "singular.majorant_supersolution",
            majorant.passed,
            format!("{} violations in the transformed barrier check", majorant.check.violations.len()),
        );
        let schedule = CutoffSchedule::from_ladder(&b.ladder, self.delta.max(), s.factor, s.max_cutoffs);
        let delta = &self.delta.values;
        let run = solve_singular(
            &self.model,
            delta,
            &src,
            schedule,
            s.stop_tol,
            Some((&majorant.values, &b.resolved)),
            &self.cfg.solver,
        );
        let run = match run {
            Err(SingularError::MajorantViolation { iterate, node, value, bound }) => {
                self.check(
                    "singular.majorant",
                    false,
                    format!("iterate {iterate}, node {node}: |u| = {value} > v = {bound}"),
                );
                return Ok(());
            }
            r => r?,
        };
        self.check("singular.majorant", true, format!("{} iterates", run.iterates.len()));
        self.check("singular.converged", run.converged, format!("{} cutoffs", run.iterates.len()));
        if s.sign == SourceSign::Positive {
            let worst = run.iterates.iter().filter_map(|r| r.min_increment).fold(f64::INFINITY, f64::min);
            self.check("singular.monotone", worst >= -1e-8, format!("smallest increment {worst:e}"));
        }
        let ratio = run.final_energy_ratio().unwrap_or(1.0);
        self.check("singular.energy", ratio <= 1.05, format!("final probe energy ratio {ratio}"));
        let r_fine = b.ladder.radius_of(b.ladder.k_hi);
        let bound = verify_theorem_bound(&run.u, delta, &b.resolved, c, &src, r_fine);
        self.check(
            "singular.bound",
            bound.violations.is_empty(),
            format!("{} violations of {} resolved nodes, utilization {:e}", bound.violations.len(), bound.checked, bound.utilization),
        );
        self.check(
            "singular.boundary_layer",
            bound.boundary_layer.0 <= bound.boundary_layer.1,
            format!("{} ≤ {:e}", bound.boundary_layer.0, bound.boundary_layer.1),
        );
        let mut uniqueness = None;
        if let Some(f) = s.compare_factor {
            let other = CutoffSchedule { factor: f, ..schedule };
            let alt = solve_singular(&self.model, delta, &src, other, s.stop_tol, None, &self.cfg.solver)?;
            let u = uniqueness_probe(&run.u, &alt.u, s.stop_tol);
            self.check(
                "singular.uniqueness",
                u.agree,
                format!("factors {} and {f}: {:e} ≤ {:e}", s.factor, u.max_difference, u.tolerance),
            );
            uniqueness = Some(u);
        }
        self.artifact("singular_convergence.csv", run.table_csv());
        let kp = s.amplitude.powf(1.0 / (c.p - 1.0));
        let mut csv = String::from("x,y,delta,u,majorant,bound,utilization,resolved\n");
        for i in 0..self.mesh.n_nodes() {
            let x = self.mesh.nodes[i];
            let cap = bound.constant * kp * delta[i].powf(beta);
            let util = if cap > 0.0 { run.u[i].abs() / cap } else { 0.0 };
            csv += &format!(
                "{},{},{},{},{},{},{},{}\n",
                x[0], x[1], delta[i], run.u[i], majorant.values[i], cap, util, b.resolved[i] as u8
            );
        }
        self.artifact("singular_bound.csv", csv);
        self.results.insert(
            "singular".into(),
            json!({
                "beta": beta,
                "alpha": c.alpha,
                "amplitude": s.amplitude,
                "transform": to_value(&majorant.transform),
                "majorant_check": to_value(&majorant.check),
                "run": to_value(&run),
                "bound": to_value(&bound),
                "uniqueness": to_value(&uniqueness),
            }),
        );
        Ok(())
    }
}

/// Runs one subcommand. Module errors abort the run; failed checks do not.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let t0 = Instant::now();
    let mesh = build_mesh(&cfg.domain, cfg.mesh.h)?;
    let delta = distance_field(&mesh)?;
    let op = Operator::new(&cfg.operator, Some(mesh.gamma_set()))?;
    let model = FeModel::new(&mesh, &op)?;
    let mut r = Run {
        cfg,
        mesh: &mesh,
        delta: &delta,
        model,
        op: &op,
        results: BTreeMap::new(),
        checks: Vec::new(),
        artifacts: Vec::new(),
        timing: BTreeMap::new(),
    };
    r.timing.insert("setup".into(), t0.elapsed().as_secs_f64());
    r.results.insert(
        "mesh".into(),
        json!({ "nodes": mesh.n_nodes(), "cells": mesh.n_cells(), "h": mesh.h, "nonobtuse": mesh.nonobtuse }),
    );
    match command {
        Command::Solve => r.timed("solve", |r| r.solve())?,
        Command::Capacity => r.timed("capacity", |r| r.capacity())?,
        Command::CdcCheck => r.timed("cdc", |r| r.cdc())?,
        Command::Barrier => {
            r.timed("barrier", |r| r.barrier())?;
        }
        Command::Hardy => {
            let b = r.timed("barrier", |r| r.barrier())?;
            r.timed("hardy", |r| r.hardy(&b))?;
        }
        Command::SingularSolve => {
            let b = r.timed("barrier", |r| r.barrier())?;
            r.timed("singular", |r| r.singular(&b))?;
        }
        Command::FullPipeline => {
            let b = r.timed("barrier", |r| r.barrier())?;
            r.timed("hardy", |r| r.hardy(&b))?;
            r.timed("singular", |r| r.singular(&b))?;
        }
    }
    r.timing.insert("total".into(), t0.elapsed().as_secs_f64());
    let passed = r.checks.iter().all(|c| c.passed);
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        config: cfg.clone(),
        results: r.results,
        checks: r.checks,
        passed,
        timing: r.timing,
    };
    Ok(RunOutput { report, artifacts: r.artifacts })
}
