//! Time integration of the graphical flow `du/dt = g^{ij}(Du) D_ij u`.
//!
//! Explicit Euler and Heun steps are CFL-limited by the largest eigenvalue
//! of `g^{-1}`. Near-lightlike data makes that limit tiny, so a linearly
//! implicit Crank-Nicolson predictor-corrector is also provided; it runs
//! at a caller-chosen fixed step.

pub(crate) mod engine;
mod entire;
mod implicit;

use serde::{Deserialize, Serialize};

use crate::error::FlowError;
use crate::grid::GraphState;

pub use engine::{cfl_dt, run, step, FlowRunner};
pub use entire::{entire_solve, entire_solve_with_residual, EntireResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    Entire,
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    #[default]
    Heun,
    /// Linearly implicit: a backward-Euler predictor with frozen
    /// coefficients, then a trapezoidal corrector with coefficients frozen
    /// at the midpoint. Requires `fixed_dt`.
    CrankNicolson,
}

impl Scheme {
    pub fn is_explicit(&self) -> bool {
        !matches!(self, Self::CrankNicolson)
    }
}

fn default_safety() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub mode: FlowMode,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    /// Absolute end time.
    pub t_end: f64,
    /// Snapshot cadence in flow time; without it only the initial and
    /// final states are kept.
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    /// Stop once `sup ||H||` over evolved nodes drops below this.
    #[serde(default)]
    pub steady_state_tol: Option<f64>,
    #[serde(default)]
    pub entire_radii: Option<Vec<f64>>,
    /// Reflection margin for entire-mode truncations.
    #[serde(default)]
    pub entire_lambda: Option<f64>,
    /// Step size override. Explicit schemes still refuse steps above the
    /// stability limit.
    #[serde(default)]
    pub fixed_dt: Option<f64>,
}

impl FlowConfig {
    pub fn new(mode: FlowMode, t_end: f64) -> Self {
        Self {
            mode,
            scheme: Scheme::default(),
            cfl_safety: default_safety(),
            t_end,
            snapshot_every: None,
            steady_state_tol: None,
            entire_radii: None,
            entire_lambda: None,
            fixed_dt: None,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |s: String| Err(FlowError::InvalidConfig(s));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety));
        }
        if let Some(s) = self.snapshot_every {
            if !(s > 0.0) {
                return bad(format!("snapshot_every = {s} must be positive"));
            }
        }
        if let Some(s) = self.steady_state_tol {
            if !(s > 0.0) {
                return bad(format!("steady_state_tol = {s} must be positive"));
            }
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("fixed_dt = {dt} must be positive"));
            }
        }
        if self.scheme == Scheme::CrankNicolson && self.fixed_dt.is_none() {
            return bad("crank_nicolson needs fixed_dt".into());
        }
        if let Some(r) = &self.entire_radii {
            if r.is_empty() || r.iter().any(|&x| !(x > 0.0)) || r.windows(2).any(|w| w[1] <= w[0]) {
                return bad(format!("entire_radii {r:?} must be positive and increasing"));
            }
        }
        if let Some(l) = self.entire_lambda {
            if !(l > 0.0) {
                return bad(format!("entire_lambda = {l} must be positive"));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one accepted step, measured on the state after it.
/// Suprema run over evolved nodes; `t_sup_ii2` uses the elapsed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub sup_v2: f64,
    pub sup_h2: f64,
    pub t_sup_ii2: f64,
    pub max_displacement: f64,
    pub barrier_margins: Vec<f64>,
    pub expander_residual: Option<f64>,
}

impl StepRecord {
    pub fn min_barrier_margin(&self) -> Option<f64> {
        self.barrier_margins.iter().cloned().reduce(f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Initial state first, final state last, times strictly increasing.
    pub snapshots: Vec<GraphState>,
    pub diagnostics: Vec<StepRecord>,
    /// Barrier margins of the initial state.
    pub initial_barrier_margins: Vec<f64>,
    /// Self-expander residual per snapshot, when requested.
    pub snapshot_residuals: Vec<f64>,
    /// Time at which the steady-state threshold was met, if it was.
    pub steady_state_at: Option<f64>,
}

impl Trajectory {
    pub fn initial(&self) -> &GraphState {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &GraphState {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}
