//! Orchestration behind the command-line subcommands: build the initial
//! state from a [`RunConfig`], run the flow, evaluate checks and write the
//! artifacts of one experiment into an output directory.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{CheckName, InitialData, OracleParams, RunConfig};
use super::{emit_csv, read_snapshot, write_snapshot};
use crate::error::{CheckError, FlowError, GeometryError, GridError, IoError};
use crate::flow::{entire_solve, entire_solve_with_residual, FlowMode, FlowRunner, Trajectory};
use crate::flow::EntireResult;
use crate::g2;
use crate::grid::{BoundaryData, BoundaryKind, GraphState};
use crate::oracle::{refinement_study, RefinementStudy};
use crate::renorm::{cone_initial_data, rescale, rescale_time};
use crate::solutions::ExactSolution;
use crate::verify::{self, VerdictReport};

/// Failure of an experiment, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    /// Bad configuration or unusable input data (exit status 2).
    #[error("{0}")]
    Config(String),
    /// The run itself broke down (exit status 1).
    #[error("{0}")]
    Failed(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Failed(_) => 1,
        }
    }
}

impl From<IoError> for ExperimentError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Config(_) | IoError::Snapshot(_) => Self::Config(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<FlowError> for ExperimentError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidConfig(_) | FlowError::NotAcausal { .. } => Self::Config(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<GridError> for ExperimentError {
    fn from(e: GridError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<CheckError> for ExperimentError {
    fn from(e: CheckError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<GeometryError> for ExperimentError {
    fn from(e: GeometryError) -> Self {
        Self::Failed(e.to_string())
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub pass: bool,
    pub verdicts: Vec<VerdictReport>,
    /// Path of the results document, if one was written.
    pub results: Option<PathBuf>,
    /// Subcommand-specific summary, also embedded in the results document.
    pub summary: Value,
}

fn unit(x: f64, b: [f64; 2]) -> f64 {
    (x - b[0]) / (b[1] - b[0])
}

/// Samples the configured initial data and attaches boundary data.
pub fn build_initial(cfg: &RunConfig) -> Result<GraphState, ExperimentError> {
    let (n, m) = (cfg.n(), cfg.m());
    let d = cfg.domain.clone();
    let bounds = d.bounds.clone();
    let mut state = match &cfg.initial {
        InitialData::Flat {} => GraphState::zeros(d, m)?,
        InitialData::Exact { solution, t0 } => GraphState::from_fn(d, m, *t0, |x, o| solution.value(x, *t0, o))?,
        InitialData::Cosine { amplitude } => GraphState::from_fn(d, m, 0.0, |x, o| {
            o.fill(0.0);
            o[0] = amplitude * x.iter().zip(&bounds).map(|(&v, &b)| (PI * unit(v, b)).cos()).product::<f64>();
        })?,
        InitialData::Affine { matrix, offset, bump } => GraphState::from_fn(d, m, 0.0, |x, o| {
            for (a, out) in o.iter_mut().enumerate() {
                *out = matrix[a].iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + offset.get(a).copied().unwrap_or(0.0);
            }
            o[0] += bump * x.iter().zip(&bounds).map(|(&v, &b)| (PI * unit(v, b)).sin()).product::<f64>();
        })?,
        InitialData::Inline { u } => GraphState::new(d, m, 0.0, u.clone())?,
        InitialData::Cone { profile, rho } => cone_initial_data(profile, *rho, &d)?,
        InitialData::Snapshot { path } => {
            let s = read_snapshot(path)?;
            if s.n() != n || s.m != m {
                return Err(ExperimentError::Config(format!(
                    "snapshot {} has signature ({}, {}), config says ({n}, {m})",
                    path.display(),
                    s.n(),
                    s.m
                )));
            }
            s
        }
    };
    if state.dirichlet_data.is_none() {
        match state.domain.boundary {
            BoundaryKind::Dirichlet => state = state.with_current_boundary()?,
            BoundaryKind::ExactTracking => {
                let sol = match cfg.initial {
                    InitialData::Exact { solution, .. } => solution,
                    _ => ExactSolution::GrimReaper,
                };
                state = state.with_dirichlet(BoundaryData::Exact(sol))?;
            }
            BoundaryKind::Neumann => {}
        }
    }
    state.provenance.config_hash = cfg.hash();
    Ok(state)
}

/// The flow's output: a trajectory, plus the truncation ladder in entire mode.
#[derive(Debug, Clone)]
pub struct Execution {
    pub trajectory: Trajectory,
    pub entire: Option<EntireResult>,
}

pub fn execute(cfg: &RunConfig, initial: &GraphState) -> Result<Execution, ExperimentError> {
    let core = cfg.renorm.as_ref().map(|r| r.core_fraction);
    let mut exec = if cfg.flow.mode == FlowMode::Entire {
        if !cfg.barriers.is_empty() {
            return Err(ExperimentError::Config("barriers are not monitored in entire mode".into()));
        }
        let res = match core {
            Some(c) => entire_solve_with_residual(&cfg.flow, initial, c)?,
            None => entire_solve(&cfg.flow, initial)?,
        };
        Execution { trajectory: res.trajectory().clone(), entire: Some(res) }
    } else {
        let mut runner = FlowRunner::new(&cfg.flow).with_barriers(cfg.barriers.clone());
        if let Some(c) = core {
            runner = runner.with_expander_residual(c);
        }
        Execution { trajectory: runner.run(initial)?, entire: None }
    };
    let hash = cfg.hash();
    for s in &mut exec.trajectory.snapshots {
        s.provenance.config_hash = hash.clone();
    }
    Ok(exec)
}

fn verdict(check: &str, pass: bool, margin: f64, t: f64, tolerance: f64) -> VerdictReport {
    VerdictReport { check: check.into(), pass, worst_margin: margin, worst_t: t, worst_node: None, tolerance }
}

pub fn evaluate_checks(cfg: &RunConfig, initial: &GraphState, exec: &Execution) -> Result<Vec<VerdictReport>, ExperimentError> {
    let traj = &exec.trajectory;
    let mut out = Vec::with_capacity(cfg.checks.len());
    for check in &cfg.checks {
        out.push(match check {
            CheckName::Displacement => verify::check_displacement(traj)?,
            CheckName::HDecay => verify::check_h_decay(traj)?,
            CheckName::GradientPrinciple => verify::check_gradient_principle(traj)?,
            CheckName::TameCurvature => verify::check_tame_curvature(traj)?,
            CheckName::Acausal => {
                let (delta, pass) = verify::check_acausal(initial)?;
                verdict("acausal", pass, delta, initial.t, 0.0)
            }
            CheckName::DirichletBoundaryH => verify::check_dirichlet_boundary_h(traj, cfg.verify.boundary_h_constant)?,
            CheckName::Barriers => verify::check_barriers(traj, &cfg.barriers)?,
            CheckName::EntireConvergence => {
                let e = exec
                    .entire
                    .as_ref()
                    .ok_or_else(|| ExperimentError::Config("entire_convergence needs entire mode".into()))?;
                let margin = e.discrepancies.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
                let margin = if margin.is_finite() { margin } else { 0.0 };
                verdict("entire_convergence", e.converged, margin, traj.last().t, 0.0)
            }
        });
    }
    Ok(out)
}

fn io_fail(e: std::io::Error) -> ExperimentError {
    ExperimentError::Failed(e.to_string())
}

/// Writes the CSV, every snapshot and `results.json` under `out`.
fn write_artifacts(
    cfg: &RunConfig,
    out: &Path,
    exec: &Execution,
    verdicts: &[VerdictReport],
    summary: &Value,
    extra_files: Value,
) -> Result<PathBuf, ExperimentError> {
    std::fs::create_dir_all(out.join("snapshots")).map_err(io_fail)?;
    let csv = out.join("diagnostics.csv");
    emit_csv(&exec.trajectory, &csv)?;
    let mut snaps = Vec::with_capacity(exec.trajectory.snapshots.len());
    for s in &exec.trajectory.snapshots {
        let p = out.join("snapshots").join(format!("step_{:08}.json", s.provenance.step));
        write_snapshot(&p, s)?;
        snaps.push(p);
    }
    let mut truncation_csvs = Vec::new();
    if let Some(e) = &exec.entire {
        for (k, t) in e.truncations.iter().enumerate() {
            let p = out.join(format!("diagnostics_truncation_{k}.csv"));
            emit_csv(t, &p)?;
            truncation_csvs.push(p);
        }
    }
    let doc = json!({
        "config": cfg,
        "config_hash": cfg.hash(),
        "files": {
            "diagnostics": csv,
            "snapshots": snaps,
            "truncation_diagnostics": truncation_csvs,
            "extra": extra_files,
        },
        "verdicts": verdicts,
        "pass": verdicts.iter().all(|v| v.pass),
        "summary": summary,
    });
    let results = out.join("results.json");
    std::fs::write(&results, serde_json::to_string_pretty(&doc).map_err(IoError::from)?).map_err(io_fail)?;
    Ok(results)
}

fn run_summary(exec: &Execution) -> Value {
    let t = &exec.trajectory;
    let last = t.last();
    let mut s = json!({
        "steps": t.diagnostics.len(),
        "t_final": last.t,
        "steady_state_at": t.steady_state_at,
        "final_sup_v2": t.diagnostics.last().map(|r| r.sup_v2),
        "final_sup_H2": t.diagnostics.last().map(|r| r.sup_h2),
    });
    if let Some(e) = &exec.entire {
        s["entire"] = json!({ "radii": e.radii, "discrepancies": e.discrepancies, "converged": e.converged });
    }
    s
}

fn out_dir(cfg: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone())
}

fn flow_and_checks(cfg: &RunConfig) -> Result<(GraphState, Execution, Vec<VerdictReport>), ExperimentError> {
    let initial = build_initial(cfg)?;
    let exec = execute(cfg, &initial)?;
    let verdicts = evaluate_checks(cfg, &initial, &exec)?;
    Ok((initial, exec, verdicts))
}

/// `run`: flow, write artifacts, evaluate any configured checks. Check
/// failures are recorded but do not fail the command.
pub fn run_command(cfg: &RunConfig, out: Option<&Path>) -> Result<Report, ExperimentError> {
    let (_, exec, verdicts) = flow_and_checks(cfg)?;
    let summary = run_summary(&exec);
    let results = write_artifacts(cfg, &out_dir(cfg, out), &exec, &verdicts, &summary, Value::Null)?;
    Ok(Report { pass: true, verdicts, results: Some(results), summary })
}

/// `verify`: as `run`, but fails unless every configured check passes.
pub fn verify_command(cfg: &RunConfig, out: Option<&Path>) -> Result<Report, ExperimentError> {
    if cfg.checks.is_empty() {
        return Err(ExperimentError::Config("verify needs a non-empty `checks` list".into()));
    }
    let (_, exec, verdicts) = flow_and_checks(cfg)?;
    let summary = run_summary(&exec);
    let results = write_artifacts(cfg, &out_dir(cfg, out), &exec, &verdicts, &summary, Value::Null)?;
    Ok(Report { pass: verdicts.iter().all(|v| v.pass), verdicts, results: Some(results), summary })
}

/// Refinement studies used when no oracle section is configured.
pub fn default_oracle_studies() -> Vec<OracleParams> {
    let spacings = vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    vec![
        OracleParams {
            solution: ExactSolution::GrimReaper,
            n: 1,
            bounds: [-5.0, 5.0],
            times: vec![0.0, 0.5],
            spacings: spacings.clone(),
            order_tol: 0.2,
        },
        OracleParams {
            solution: ExactSolution::HyperbolicExpander,
            n: 1,
            bounds: [-2.0, 2.0],
            times: vec![0.1, 0.25, 0.5, 1.0],
            spacings,
            order_tol: 0.2,
        },
    ]
}

pub fn run_studies(params: &[OracleParams]) -> Result<Vec<(RefinementStudy, bool)>, ExperimentError> {
    params
        .iter()
        .map(|p| {
            let s = refinement_study(p.solution, p.n, p.bounds, &p.times, &p.spacings)?;
            let ok = s.order_within(2.0, p.order_tol);
            Ok((s, ok))
        })
        .collect()
}

/// `oracle`: residual refinement studies of the closed-form solutions.
pub fn oracle_command(cfg: Option<&RunConfig>, out: Option<&Path>) -> Result<Report, ExperimentError> {
    let params = match cfg.and_then(|c| c.oracle.clone()) {
        Some(p) => vec![p],
        None => default_oracle_studies(),
    };
    let studies = run_studies(&params)?;
    let pass = studies.iter().all(|s| s.1);
    let verdicts: Vec<VerdictReport> = studies
        .iter()
        .zip(&params)
        .map(|((s, ok), p)| {
            let margin = p.order_tol - (s.fitted_order - 2.0).abs();
            verdict(&format!("oracle_order_{}", serde_json::to_value(s.solution).unwrap().as_str().unwrap()), *ok, margin, 0.0, 0.0)
        })
        .collect();
    let summary = json!({ "studies": studies.iter().map(|s| &s.0).collect::<Vec<_>>() });
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.map(|c| c.output_dir.clone()));
    let results = match dir {
        Some(d) => {
            std::fs::create_dir_all(&d).map_err(io_fail)?;
            let p = d.join("oracle.json");
            let doc = json!({ "pass": pass, "verdicts": verdicts, "summary": summary });
            std::fs::write(&p, serde_json::to_string_pretty(&doc).map_err(IoError::from)?).map_err(io_fail)?;
            Some(p)
        }
        None => None,
    };
    Ok(Report { pass, verdicts, results, summary })
}

/// `renorm`: flow, then report the self-expander residual in rescaled time
/// and save the rescaled final state.
pub fn renorm_command(cfg: &RunConfig, out: Option<&Path>) -> Result<Report, ExperimentError> {
    let mut cfg = cfg.clone();
    let params = cfg.renorm.get_or_insert_with(Default::default).clone();
    let (_, exec, mut verdicts) = flow_and_checks(&cfg)?;
    let traj = &exec.trajectory;
    let series: Vec<Value> = traj
        .snapshots
        .iter()
        .zip(&traj.snapshot_residuals)
        .map(|(s, r)| json!({ "t": s.t, "s": rescale_time(s.t).0, "residual": r }))
        .collect();
    let final_residual = traj.snapshot_residuals.last().copied();
    if let (Some(tol), Some(r)) = (params.residual_tol, final_residual) {
        verdicts.push(verdict("expander_residual", r <= tol, tol - r, traj.last().t, 0.0));
    }
    if let Some(e) = &exec.entire {
        if !cfg.checks.contains(&CheckName::EntireConvergence) {
            let margin = e.discrepancies.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
            verdicts.push(verdict("entire_convergence", e.converged, if margin.is_finite() { margin } else { 0.0 }, traj.last().t, 0.0));
        }
    }
    let dir = out_dir(&cfg, out);
    std::fs::create_dir_all(&dir).map_err(io_fail)?;
    let rescaled = rescale(traj.last());
    let rescaled_path = dir.join("rescaled_final.json");
    write_snapshot(&rescaled_path, &rescaled.state)?;
    let mut summary = run_summary(&exec);
    summary["renorm"] = json!({ "series": series, "final_residual": final_residual, "final_s": rescaled.s, "lambda": rescaled.lambda });
    let results = write_artifacts(&cfg, &dir, &exec, &verdicts, &summary, json!({ "rescaled_final": rescaled_path }))?;
    Ok(Report { pass: verdicts.iter().all(|v| v.pass), verdicts, results: Some(results), summary })
}

/// `g2`: flow a graph `B^3 -> R^{3,3}`, build the G2-structures of the
/// initial and final states and report closedness and torsion.
pub fn g2_command(cfg: &RunConfig, out: Option<&Path>) -> Result<Report, ExperimentError> {
    if cfg.signature != [3, 3] {
        return Err(ExperimentError::Config(format!("g2 needs signature (3, 3), got {:?}", cfg.signature)));
    }
    let params = cfg.g2.clone().unwrap_or_default();
    let (initial, exec, mut verdicts) = flow_and_checks(cfg)?;
    let last = exec.trajectory.last();
    let phi0 = g2::immersion_to_phi(&initial)?;
    let phi1 = g2::immersion_to_phi(last)?;
    let h = last.domain.h_max();
    let closed_tol = params.closed_tol.unwrap_or(h * h);
    for (name, phi, t) in [("closed_initial", &phi0, initial.t), ("closed_final", &phi1, last.t)] {
        let c = g2::check_closed(phi);
        verdicts.push(verdict(name, c <= closed_tol, closed_tol - c, t, 0.0));
    }
    let tors = g2::torsion(last)?;
    let sup = tors.sup_norm2();
    if let Some(tol) = params.torsion_tol.or(cfg.flow.steady_state_tol.map(|s| s * s)) {
        verdicts.push(verdict("torsion", sup <= tol, tol - sup, last.t, 0.0));
    }
    let dir = out_dir(cfg, out);
    std::fs::create_dir_all(&dir).map_err(io_fail)?;
    let (p0, p1) = (dir.join("phi_initial.json"), dir.join("phi_final.json"));
    std::fs::write(&p0, phi0.to_json().to_string()).map_err(io_fail)?;
    std::fs::write(&p1, phi1.to_json().to_string()).map_err(io_fail)?;
    let mut summary = run_summary(&exec);
    summary["g2"] = json!({
        "convention": g2::CONVENTION,
        "closed_initial": g2::check_closed(&phi0),
        "closed_final": g2::check_closed(&phi1),
        "closed_tol": closed_tol,
        "terminal_torsion_sup": sup,
    });
    let results = write_artifacts(cfg, &dir, &exec, &verdicts, &summary, json!({ "phi_initial": p0, "phi_final": p1 }))?;
    Ok(Report { pass: verdicts.iter().all(|v| v.pass), verdicts, results: Some(results), summary })
}
