use rayon::prelude::*;

use super::{implicit, FlowConfig, FlowMode, Scheme, StepRecord, Trajectory};
use crate::error::FlowError;
use crate::geometry::kernel;
use crate::grid::{BoundaryData, BoundaryKind, DomainKind, GraphState, Stencils};
use crate::renorm;
use crate::solutions::BarrierSpec;
use crate::verify;

/// Node counts from which per-node loops go parallel.
const PAR_MIN: usize = 4096;
const CHUNK: usize = 512;

/// Grid-level suprema of the pointwise scalars over evolved nodes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scan {
    pub max_lambda: f64,
    pub worst_node: usize,
    pub spacelike: bool,
    pub g_inv_max: f64,
    pub sup_v2: f64,
    pub sup_h2: f64,
    pub sup_ii2: f64,
}

impl Scan {
    fn empty() -> Self {
        Self {
            max_lambda: f64::NEG_INFINITY,
            worst_node: usize::MAX,
            spacelike: true,
            g_inv_max: 0.0,
            sup_v2: 0.0,
            sup_h2: 0.0,
            sup_ii2: 0.0,
        }
    }

    fn merge(self, o: Self) -> Self {
        let take_o = o.max_lambda > self.max_lambda || (o.max_lambda == self.max_lambda && o.worst_node < self.worst_node);
        Self {
            max_lambda: self.max_lambda.max(o.max_lambda),
            worst_node: if take_o { o.worst_node } else { self.worst_node },
            spacelike: self.spacelike && o.spacelike,
            g_inv_max: self.g_inv_max.max(o.g_inv_max),
            sup_v2: self.sup_v2.max(o.sup_v2),
            sup_h2: self.sup_h2.max(o.sup_h2),
            sup_ii2: self.sup_ii2.max(o.sup_ii2),
        }
    }
}

/// Per-domain precomputation shared by every step of a run.
pub(crate) struct Engine {
    pub n: usize,
    pub m: usize,
    pub stencils: Stencils,
    pub evolved: Vec<usize>,
    pub boundary: Vec<usize>,
    pub pinned: bool,
    pub h_min: f64,
}

impl Engine {
    pub fn new(state: &GraphState) -> Self {
        let d = &state.domain;
        Self {
            n: d.n(),
            m: state.m,
            stencils: Stencils::new(d),
            evolved: d.evolved_nodes(),
            boundary: d.boundary_nodes(),
            pinned: d.boundary.is_pinned(),
            h_min: d.h_min(),
        }
    }

    /// Applies `f` to chunks of evolved nodes, in parallel for large grids,
    /// returning per-chunk results in order.
    fn chunked<T: Send>(&self, f: impl Fn(&[usize]) -> T + Sync) -> Vec<T> {
        if self.evolved.len() >= PAR_MIN {
            self.evolved.par_chunks(CHUNK).map(&f).collect()
        } else {
            self.evolved.chunks(CHUNK).map(&f).collect()
        }
    }

    pub fn scan(&self, u: &[f64]) -> Scan {
        let (n, m) = (self.n, self.m);
        self.chunked(|nodes| {
            let mut du = vec![0.0; n * m];
            let mut d2u = vec![0.0; n * n * m];
            let mut acc = Scan::empty();
            for &node in nodes {
                self.stencils.jet_into(u, m, node, &mut du, &mut d2u);
                let p = kernel::point_scalars(&du, &d2u, n, m);
                let here = Scan {
                    max_lambda: if p.max_lambda.is_nan() { f64::INFINITY } else { p.max_lambda },
                    worst_node: node,
                    spacelike: p.spacelike,
                    g_inv_max: p.g_inv_max,
                    sup_v2: p.v2,
                    sup_h2: p.h_norm2,
                    sup_ii2: p.ii_norm2,
                };
                acc = acc.merge(here);
            }
            acc
        })
        .into_iter()
        .fold(Scan::empty(), Scan::merge)
    }

    /// `g^{ij} D_ij u` at evolved nodes, zero elsewhere.
    pub fn velocity(&self, u: &[f64], out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let parts = self.chunked(|nodes| {
            let mut du = vec![0.0; n * m];
            let mut d2u = vec![0.0; n * n * m];
            let mut v = vec![0.0; nodes.len() * m];
            for (k, &node) in nodes.iter().enumerate() {
                self.stencils.jet_into(u, m, node, &mut du, &mut d2u);
                let met = kernel::metric(&du, n, m);
                kernel::velocity(&met, &d2u, n, m, &mut v[k * m..(k + 1) * m]);
            }
            v
        });
        out.fill(0.0);
        for (nodes, v) in self.evolved.chunks(CHUNK).zip(parts) {
            for (k, &node) in nodes.iter().enumerate() {
                out[node * m..(node + 1) * m].copy_from_slice(&v[k * m..(k + 1) * m]);
            }
        }
    }

    /// Writes the boundary data at time `t` into pinned nodes.
    pub fn pin(&self, state: &GraphState, t: f64, u: &mut [f64]) -> Result<(), FlowError> {
        if !self.pinned {
            return Ok(());
        }
        let vals = state.boundary_values(t)?;
        let m = self.m;
        for (k, &b) in self.boundary.iter().enumerate() {
            u[b * m..(b + 1) * m].copy_from_slice(&vals[k * m..(k + 1) * m]);
        }
        Ok(())
    }

    pub fn cfl(&self, scan: &Scan, safety: f64) -> f64 {
        safety * self.h_min * self.h_min / (2.0 * self.n as f64 * scan.g_inv_max)
    }

    /// One step from `state`; returns the new state and its scan.
    pub fn step(&self, state: &GraphState, dt: f64, scheme: Scheme) -> Result<(GraphState, Scan), FlowError> {
        let t1 = state.t + dt;
        let u1 = match scheme {
            Scheme::Euler | Scheme::Heun => {
                let len = state.u.len();
                let mut v0 = vec![0.0; len];
                self.velocity(&state.u, &mut v0);
                let mut u1: Vec<f64> = state.u.iter().zip(&v0).map(|(u, v)| u + dt * v).collect();
                self.pin(state, t1, &mut u1)?;
                if scheme == Scheme::Heun {
                    let mut v1 = vec![0.0; len];
                    self.velocity(&u1, &mut v1);
                    for k in 0..len {
                        u1[k] = state.u[k] + 0.5 * dt * (v0[k] + v1[k]);
                    }
                    self.pin(state, t1, &mut u1)?;
                }
                u1
            }
            Scheme::CrankNicolson => implicit::crank_nicolson(self, state, dt)?,
        };
        if let Some(k) = u1.iter().position(|v| !v.is_finite()) {
            return Err(FlowError::NumericalBlowup { node: k / self.m, t: t1 });
        }
        let scan = self.scan(&u1);
        if !scan.spacelike {
            return Err(FlowError::SpacelikeViolation { node: scan.worst_node, t: t1, max_eigenvalue: scan.max_lambda });
        }
        let mut next = state.clone();
        next.u = u1;
        next.t = t1;
        next.provenance.step += 1;
        Ok((next, scan))
    }
}

/// Largest stable explicit step, `safety * h^2 / (2 n max eig(g^{-1}))`.
pub fn cfl_dt(state: &GraphState, safety: f64) -> Result<f64, FlowError> {
    let e = Engine::new(state);
    let scan = e.scan(&state.u);
    if !scan.spacelike {
        return Err(FlowError::SpacelikeViolation { node: scan.worst_node, t: state.t, max_eigenvalue: scan.max_lambda });
    }
    Ok(e.cfl(&scan, safety))
}

/// One step of size `dt`. Pinned boundary nodes take their data at the new
/// time. No stability check is made.
pub fn step(state: &GraphState, dt: f64, scheme: Scheme) -> Result<GraphState, FlowError> {
    Engine::new(state).step(state, dt, scheme).map(|(s, _)| s)
}

/// Runs a flow with optional barrier monitoring and self-expander
/// residuals at snapshots.
#[derive(Debug, Clone)]
pub struct FlowRunner<'a> {
    config: &'a FlowConfig,
    barriers: Vec<BarrierSpec>,
    residual_core: Option<f64>,
}

impl<'a> FlowRunner<'a> {
    pub fn new(config: &'a FlowConfig) -> Self {
        Self { config, barriers: Vec::new(), residual_core: None }
    }

    pub fn with_barriers(mut self, barriers: Vec<BarrierSpec>) -> Self {
        self.barriers = barriers;
        self
    }

    /// Computes the self-expander residual at every snapshot over the core
    /// `|x| <= fraction * half-width` of the rescaled grid.
    pub fn with_expander_residual(mut self, core_fraction: f64) -> Self {
        self.residual_core = Some(core_fraction);
        self
    }

    fn check_mode(&self, state: &GraphState) -> Result<(), FlowError> {
        let d = &state.domain;
        let ok = match self.config.mode {
            FlowMode::Neumann => d.boundary == BoundaryKind::Neumann,
            FlowMode::Entire => d.kind == DomainKind::EntireTruncation,
            FlowMode::Dirichlet => d.boundary.is_pinned(),
        };
        if !ok {
            return Err(FlowError::InvalidConfig(format!(
                "mode {:?} does not fit a {:?} domain with {} boundary",
                self.config.mode,
                d.kind,
                d.boundary.name()
            )));
        }
        if d.boundary == BoundaryKind::ExactTracking && !matches!(state.dirichlet_data, Some(BoundaryData::Exact(_))) {
            return Err(FlowError::InvalidConfig("exact tracking needs a closed-form boundary solution".into()));
        }
        Ok(())
    }

    fn margins(&self, profiles: &[Option<Vec<f64>>], state: &GraphState) -> Vec<f64> {
        self.barriers
            .iter()
            .zip(profiles)
            .map(|(b, p)| match (b, p) {
                (BarrierSpec::QuasiSphere(q), _) => q.margin(state),
                (BarrierSpec::YangLi(y), Some(p)) => y.margin_with(p, state),
                (BarrierSpec::YangLi(_), None) => unreachable!("profiles cached for every yang-li barrier"),
            })
            .collect()
    }

    fn residual(&self, state: &GraphState) -> Result<Option<f64>, FlowError> {
        match self.residual_core {
            None => Ok(None),
            Some(f) => Ok(Some(renorm::expander_residual(state, f)?)),
        }
    }

    pub fn run(&self, initial: &GraphState) -> Result<Trajectory, FlowError> {
        let cfg = self.config;
        cfg.validate()?;
        initial.domain.validate()?;
        self.check_mode(initial)?;
        if initial.t >= cfg.t_end {
            return Err(FlowError::InvalidConfig(format!("initial time {} is not before t_end {}", initial.t, cfg.t_end)));
        }
        let engine = Engine::new(initial);
        let mut state = initial.clone();
        if engine.pinned {
            if let Some(BoundaryData::Fixed(_)) = &state.dirichlet_data {
                let delta = verify::acausal_delta(&state).map_err(|e| FlowError::InvalidConfig(e.to_string()))?;
                if !(delta > 0.0) {
                    return Err(FlowError::NotAcausal { delta });
                }
            }
            engine.pin(initial, state.t, &mut state.u)?;
        }
        let mut scan = engine.scan(&state.u);
        if !scan.spacelike {
            return Err(FlowError::SpacelikeViolation { node: scan.worst_node, t: state.t, max_eigenvalue: scan.max_lambda });
        }

        let mut profiles = Vec::with_capacity(self.barriers.len());
        for b in &self.barriers {
            profiles.push(match b {
                BarrierSpec::YangLi(y) => {
                    y.validate().map_err(FlowError::InvalidConfig)?;
                    Some(y.node_profiles(&state.domain).map_err(|e| FlowError::InvalidConfig(e.to_string()))?)
                }
                BarrierSpec::QuasiSphere(_) => None,
            });
        }

        let t0 = state.t;
        let m = state.m;
        let u0 = state.u.clone();
        let mut traj = Trajectory {
            snapshots: vec![state.clone()],
            diagnostics: Vec::new(),
            initial_barrier_margins: self.margins(&profiles, &state),
            snapshot_residuals: Vec::new(),
            steady_state_at: None,
        };
        if let Some(r) = self.residual(&state)? {
            traj.snapshot_residuals.push(r);
        }
        let steady = |s: &Scan| cfg.steady_state_tol.is_some_and(|tol| s.sup_h2.sqrt() < tol);
        if steady(&scan) {
            traj.steady_state_at = Some(t0);
            return Ok(traj);
        }

        let mut next_snap = 1u64;
        let span = cfg.t_end - t0;
        while state.t < cfg.t_end {
            let limit = engine.cfl(&scan, 1.0);
            let mut dt = match cfg.fixed_dt {
                Some(dt) => {
                    if cfg.scheme.is_explicit() && dt > limit {
                        return Err(FlowError::InvalidConfig(format!(
                            "fixed_dt {dt} exceeds the explicit stability limit {limit} at t = {}",
                            state.t
                        )));
                    }
                    dt
                }
                None => engine.cfl(&scan, cfg.cfl_safety),
            };
            let remaining = cfg.t_end - state.t;
            let last = dt >= remaining - 1e-12 * span;
            if last {
                dt = remaining;
            }
            let (mut next, next_scan) = match engine.step(&state, dt, cfg.scheme) {
                Err(FlowError::NumericalBlowup { .. }) => {
                    dt *= 0.5;
                    engine.step(&state, dt, cfg.scheme)?
                }
                other => other?,
            };
            if last && dt == remaining {
                next.t = cfg.t_end;
            }
            state = next;
            scan = next_scan;

            let disp = state
                .u
                .chunks(m)
                .zip(u0.chunks(m))
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            let mut record = StepRecord {
                step: state.provenance.step,
                t: state.t,
                dt,
                sup_v2: scan.sup_v2,
                sup_h2: scan.sup_h2,
                t_sup_ii2: (state.t - t0) * scan.sup_ii2,
                max_displacement: disp,
                barrier_margins: self.margins(&profiles, &state),
                expander_residual: None,
            };

            let done = state.t >= cfg.t_end || steady(&scan);
            let snap_due = cfg
                .snapshot_every
                .is_some_and(|every| state.t - t0 >= next_snap as f64 * every - 1e-12 * span);
            if snap_due || done {
                if let Some(every) = cfg.snapshot_every {
                    next_snap = ((state.t - t0) / every + 1e-9).floor() as u64 + 1;
                }
                record.expander_residual = self.residual(&state)?;
                if let Some(r) = record.expander_residual {
                    traj.snapshot_residuals.push(r);
                }
                traj.snapshots.push(state.clone());
            }
            traj.diagnostics.push(record);
            if steady(&scan) {
                traj.steady_state_at = Some(state.t);
                break;
            }
        }
        Ok(traj)
    }
}

/// Runs `config` from `initial` with no barriers or residuals.
pub fn run(config: &FlowConfig, initial: &GraphState) -> Result<Trajectory, FlowError> {
    FlowRunner::new(config).run(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainSpec;
    use crate::solutions::ExactSolution;

    #[test]
    fn cfl_of_flat_and_tilted_lines() {
        let d = DomainSpec::interval(0.0, 1.0, 10, BoundaryKind::Neumann);
        let flat = GraphState::zeros(d.clone(), 1).unwrap();
        assert!((cfl_dt(&flat, 0.5).unwrap() - 0.0025).abs() < 1e-15);
        let tilted = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.6 * x[0]).unwrap();
        let ratio = cfl_dt(&tilted, 0.5).unwrap() / 0.0025;
        assert!((ratio - 0.64).abs() < 1e-12);
    }

    #[test]
    fn cfl_shrinks_toward_the_light_cone() {
        let d = DomainSpec::interval(0.0, 1.0, 10, BoundaryKind::Neumann);
        let mut prev = f64::INFINITY;
        for slope in [0.0, 0.5, 0.9, 0.99, 0.999] {
            let s = GraphState::from_fn(d.clone(), 1, 0.0, |x, o| o[0] = slope * x[0]).unwrap();
            let dt = cfl_dt(&s, 1.0).unwrap();
            assert!(dt < prev);
            prev = dt;
        }
        let light = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = x[0]).unwrap();
        assert!(matches!(cfl_dt(&light, 1.0), Err(FlowError::SpacelikeViolation { .. })));
    }

    #[test]
    fn planes_are_static() {
        let d = DomainSpec::cube(2, 0.0, 1.0, 8, BoundaryKind::Neumann);
        let s = GraphState::zeros(d, 3).unwrap();
        for scheme in [Scheme::Euler, Scheme::Heun] {
            let next = step(&s, 1e-3, scheme).unwrap();
            assert_eq!(next.u, s.u);
            assert_eq!(next.t, 1e-3);
        }
    }

    fn grim_reaper_data() -> GraphState {
        let d = DomainSpec::interval(-5.0, 5.0, 1280, BoundaryKind::ExactTracking);
        let sol = ExactSolution::GrimReaper;
        GraphState::from_fn(d, 1, 0.0, |x, o| sol.value(x, 0.0, o))
            .unwrap()
            .with_dirichlet(BoundaryData::Exact(sol))
            .unwrap()
    }

    fn grim_error(s: &GraphState) -> f64 {
        let d = &s.domain;
        d.evolved_nodes()
            .into_iter()
            .map(|k| (s.u[k] - ExactSolution::GrimReaper.profile(&d.coords(k)[..1], s.t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_steps_track_the_grim_reaper() {
        let s = grim_reaper_data();
        let dt = cfl_dt(&s, 0.8).unwrap();
        assert!(dt < 1e-8);
        let heun = step(&s, dt, Scheme::Heun).unwrap();
        assert!(grim_error(&heun) < 1e-12);
        let cn = step(&s, 1e-4, Scheme::CrankNicolson).unwrap();
        assert!(grim_error(&cn) < 1e-6, "{}", grim_error(&cn));
        // far beyond the explicit limit the boundary layer loses spacelikeness
        assert!(matches!(step(&s, 1e-4, Scheme::Heun), Err(FlowError::SpacelikeViolation { .. })));
    }

    #[test]
    fn blowup_and_violations_are_reported() {
        let d = DomainSpec::interval(0.0, 1.0, 8, BoundaryKind::Neumann);
        let mut s = GraphState::zeros(d, 1).unwrap();
        s.u[3] = f64::NAN;
        assert!(matches!(step(&s, 1e-3, Scheme::Euler), Err(FlowError::NumericalBlowup { .. })));
        let kinked = GraphState::from_fn(DomainSpec::interval(0.0, 1.0, 8, BoundaryKind::Neumann), 1, 0.0, |x, o| {
            o[0] = 0.9 * (x[0] - 0.5).abs()
        })
        .unwrap();
        assert!(matches!(step(&kinked, 0.5, Scheme::Euler), Err(FlowError::SpacelikeViolation { .. })));
    }

    #[test]
    fn runs_are_deterministic_and_clamped() {
        let d = DomainSpec::interval(0.0, 1.0, 16, BoundaryKind::Neumann);
        let s = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.1 * (std::f64::consts::PI * x[0]).cos()).unwrap();
        let mut cfg = FlowConfig::new(FlowMode::Neumann, 0.05);
        cfg.snapshot_every = Some(0.01);
        let a = run(&cfg, &s).unwrap();
        let b = run(&cfg, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.last().t, 0.05);
        assert_eq!(a.snapshots.len(), 6);
        assert!(a.snapshots.windows(2).all(|w| w[1].t > w[0].t));
        assert!(a.diagnostics.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(a.diagnostics.len() as u64, a.last().provenance.step);
    }

    #[test]
    fn mode_must_match_domain() {
        let s = GraphState::zeros(DomainSpec::interval(0.0, 1.0, 8, BoundaryKind::Neumann), 1).unwrap();
        let cfg = FlowConfig::new(FlowMode::Dirichlet, 0.1);
        assert!(matches!(run(&cfg, &s), Err(FlowError::InvalidConfig(_))));
    }
}
