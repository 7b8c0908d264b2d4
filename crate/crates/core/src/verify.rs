//! Post-hoc checks of the flow estimates against a computed trajectory.
//!
//! Every check reads snapshots (and per-step diagnostics where they exist)
//! and returns a [`VerdictReport`] whose margin is negative exactly when the
//! estimate is violated; `pass` allows a slack of `tolerance`.

use serde::{Deserialize, Serialize};

use crate::error::{CheckError, GridError};
use crate::flow::Trajectory;
use crate::geometry::kernel::{self, PointScalars};
use crate::grid::{BoundaryKind, DomainKind, GraphState, Stencils};
use crate::solutions::BarrierSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub check: String,
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_t: f64,
    pub worst_node: Option<usize>,
    pub tolerance: f64,
}

impl VerdictReport {
    fn new(check: &str, worst: Worst, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            pass: worst.margin >= -tolerance,
            worst_margin: worst.margin,
            worst_t: worst.t,
            worst_node: worst.node,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Worst {
    margin: f64,
    t: f64,
    node: Option<usize>,
}

impl Worst {
    fn none() -> Self {
        Self { margin: f64::INFINITY, t: f64::NAN, node: None }
    }

    fn offer(&mut self, margin: f64, t: f64, node: Option<usize>) {
        if margin < self.margin || margin.is_nan() {
            *self = Self { margin, t, node };
        }
    }

    /// A check with nothing to examine passes with zero margin.
    fn finish(self, t0: f64) -> Self {
        if self.margin.is_infinite() {
            Self { margin: 0.0, t: t0, node: None }
        } else {
            self
        }
    }
}

pub const DISPLACEMENT_SLACK_PER_H: f64 = 4.0;
pub const H_DECAY_SLACK: f64 = 0.05;
pub const GRADIENT_SLACK: f64 = 1e-6;
pub const TAME_SLACK: f64 = 0.10;
/// Burn-in for the tame check, in units of `h^2`.
pub const TAME_BURN_IN: f64 = 10.0;
/// Constant of the boundary mean-curvature check `||H||^2 <= C h`. The
/// flow to the linear maximal graph with data `(0, 0.5)` peaks at
/// `0.024 h` for `h = 1/16` and far lower on finer grids.
pub const BOUNDARY_H_CONSTANT: f64 = 0.1;

/// Pointwise scalars at the given nodes of a state.
pub(crate) fn scalars_at(state: &GraphState, nodes: &[usize]) -> Vec<PointScalars> {
    let st = Stencils::new(&state.domain);
    let (n, m) = (state.n(), state.m);
    let mut du = vec![0.0; n * m];
    let mut d2u = vec![0.0; n * n * m];
    nodes
        .iter()
        .map(|&node| {
            st.jet_into(&state.u, m, node, &mut du, &mut d2u);
            kernel::point_scalars(&du, &d2u, n, m)
        })
        .collect()
}

fn sup_by(state: &GraphState, f: impl Fn(&PointScalars) -> f64) -> (f64, usize) {
    let nodes = state.domain.evolved_nodes();
    scalars_at(state, &nodes)
        .iter()
        .zip(&nodes)
        .map(|(p, &k)| (f(p), k))
        .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 || x.0.is_nan() { x } else { acc })
}

fn nonempty(traj: &Trajectory) -> Result<(), CheckError> {
    if traj.snapshots.is_empty() {
        return Err(CheckError::Precondition("empty trajectory".into()));
    }
    Ok(())
}

/// `||u(x, t) - u(x, t0)|| <= sqrt(2n (t - t0))` at every node and snapshot,
/// with slack `4h`.
pub fn check_displacement(traj: &Trajectory) -> Result<VerdictReport, CheckError> {
    nonempty(traj)?;
    let first = traj.initial();
    let (n, m) = (first.n(), first.m);
    let t0 = first.t;
    let mut worst = Worst::none();
    for snap in traj.snapshots.iter().filter(|s| s.t > t0) {
        let bound = (2.0 * n as f64 * (snap.t - t0)).sqrt();
        for (node, (a, b)) in snap.u.chunks(m).zip(first.u.chunks(m)).enumerate() {
            let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            worst.offer(bound - d, snap.t, Some(node));
        }
    }
    Ok(VerdictReport::new("displacement", worst.finish(t0), DISPLACEMENT_SLACK_PER_H * first.domain.h_max()))
}

/// `sup ||H||^2 (t) <= 1 / (1/C_H + 2 (t - t0) / n)` at every snapshot, as a
/// relative margin with 5% slack. Data with `C_H = 0` must stay at zero.
pub fn check_h_decay(traj: &Trajectory) -> Result<VerdictReport, CheckError> {
    nonempty(traj)?;
    let first = traj.initial();
    let n = first.n() as f64;
    let t0 = first.t;
    let (c_h, _) = sup_by(first, |p| p.h_norm2);
    if !c_h.is_finite() {
        return Err(CheckError::Precondition(format!("initial sup ||H||^2 = {c_h}")));
    }
    let mut worst = Worst::none();
    for snap in traj.snapshots.iter().filter(|s| s.t > t0) {
        let (s, node) = sup_by(snap, |p| p.h_norm2);
        if c_h == 0.0 {
            worst.offer(-s, snap.t, Some(node));
        } else {
            let bound = 1.0 / (1.0 / c_h + 2.0 * (snap.t - t0) / n);
            worst.offer(1.0 - s / bound, snap.t, Some(node));
        }
    }
    let tol = if c_h == 0.0 { 1e-12 } else { H_DECAY_SLACK };
    Ok(VerdictReport::new("h_decay", worst.finish(t0), tol))
}

/// `max v^2 (t) <= max v^2 (t0)` over snapshots and per-step diagnostics.
pub fn check_gradient_principle(traj: &Trajectory) -> Result<VerdictReport, CheckError> {
    nonempty(traj)?;
    let first = traj.initial();
    if first.domain.kind == DomainKind::EntireTruncation {
        return Err(CheckError::Precondition("the gradient principle needs a bounded neumann or dirichlet domain".into()));
    }
    let t0 = first.t;
    let (v0, _) = sup_by(first, |p| p.v2);
    let mut worst = Worst::none();
    for snap in traj.snapshots.iter().filter(|s| s.t > t0) {
        let (v, node) = sup_by(snap, |p| p.v2);
        worst.offer(v0 - v, snap.t, Some(node));
    }
    for r in &traj.diagnostics {
        worst.offer(v0 - r.sup_v2, r.t, None);
    }
    Ok(VerdictReport::new("gradient_principle", worst.finish(t0), GRADIENT_SLACK))
}

/// `(t - t0) sup ||II||^2 <= m / 2` after a burn-in of `10 h^2`, as a
/// relative margin with 10% slack.
pub fn check_tame_curvature(traj: &Trajectory) -> Result<VerdictReport, CheckError> {
    nonempty(traj)?;
    let first = traj.initial();
    let t0 = first.t;
    let half_m = 0.5 * first.m as f64;
    let h = first.domain.h_max();
    let t_min = TAME_BURN_IN * h * h;
    let mut worst = Worst::none();
    for snap in traj.snapshots.iter().filter(|s| s.t - t0 >= t_min) {
        let (ii, node) = sup_by(snap, |p| p.ii_norm2);
        worst.offer(1.0 - (snap.t - t0) * ii / half_m, snap.t, Some(node));
    }
    for r in traj.diagnostics.iter().filter(|r| r.t - t0 >= t_min) {
        worst.offer(1.0 - r.t_sup_ii2 / half_m, r.t, None);
    }
    Ok(VerdictReport::new("tame_curvature", worst.finish(t0), TAME_SLACK))
}

/// `1 - max ||phi(x) - phi(y)|| / |x - y|` over pairs of points.
pub fn acausal_delta_points(points: &[Vec<f64>], values: &[f64], m: usize) -> Result<f64, CheckError> {
    if points.len() < 2 || values.len() != points.len() * m {
        return Err(CheckError::Precondition("need at least two boundary points with m values each".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dx = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let dphi = values[i * m..(i + 1) * m]
                .iter()
                .zip(&values[j * m..(j + 1) * m])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(dphi / dx);
        }
    }
    Ok(1.0 - worst)
}

/// Acausality margin of the state's Dirichlet data at its current time.
pub fn acausal_delta(state: &GraphState) -> Result<f64, CheckError> {
    let vals = state.boundary_values(state.t)?;
    let n = state.n();
    let points: Vec<Vec<f64>> = state.domain.boundary_nodes().iter().map(|&b| state.domain.coords(b)[..n].to_vec()).collect();
    acausal_delta_points(&points, &vals, state.m)
}

/// `(delta, delta > 0)`: strict acausality of the Dirichlet data.
pub fn check_acausal(state: &GraphState) -> Result<(f64, bool), CheckError> {
    let d = acausal_delta(state)?;
    Ok((d, d > 0.0))
}

/// `||H||^2 <= C h` at boundary nodes, measured with one-sided stencils.
pub fn check_dirichlet_boundary_h(traj: &Trajectory, c: f64) -> Result<VerdictReport, CheckError> {
    nonempty(traj)?;
    let first = traj.initial();
    if !first.domain.boundary.is_pinned() {
        return Err(CheckError::Grid(GridError::WrongBoundary {
            expected: BoundaryKind::Dirichlet.name(),
            found: first.domain.boundary.name().into(),
        }));
    }
    let bound = c * first.domain.h_max();
    let nodes = first.domain.boundary_nodes();
    let mut worst = Worst::none();
    for snap in &traj.snapshots {
        for (p, &node) in scalars_at(snap, &nodes).iter().zip(&nodes) {
            worst.offer(bound - p.h_norm2, snap.t, Some(node));
        }
    }
    Ok(VerdictReport::new("dirichlet_boundary_h", worst.finish(first.t), 0.0))
}

/// Barrier containment along a run. Quasi-sphere margins may not fall
/// more than `4h^2 + 1e-8` below their initial value; Yang Li margins must
/// stay above `-4h^2`. The reported margin is the smallest distance to
/// these floors over barriers and steps.
pub fn check_barriers(traj: &Trajectory, barriers: &[BarrierSpec]) -> Result<VerdictReport, CheckError> {
    nonempty(traj)?;
    let first = traj.initial();
    if traj.initial_barrier_margins.len() != barriers.len() {
        return Err(CheckError::Precondition(format!(
            "trajectory monitored {} barriers, {} given",
            traj.initial_barrier_margins.len(),
            barriers.len()
        )));
    }
    let h = first.domain.h_max();
    let floors: Vec<f64> = barriers
        .iter()
        .zip(&traj.initial_barrier_margins)
        .map(|(b, &m0)| match b {
            BarrierSpec::QuasiSphere(_) => m0 - 4.0 * h * h - 1e-8,
            BarrierSpec::YangLi(_) => -4.0 * h * h,
        })
        .collect();
    let mut worst = Worst::none();
    for k in 0..barriers.len() {
        worst.offer(traj.initial_barrier_margins[k] - floors[k], first.t, None);
        for rec in &traj.diagnostics {
            worst.offer(rec.barrier_margins[k] - floors[k], rec.t, None);
        }
    }
    Ok(VerdictReport::new("barriers", worst.finish(first.t), 0.0))
}

/// Largest increase between consecutive values of a series.
pub fn max_increase(series: impl IntoIterator<Item = f64>) -> f64 {
    let mut prev: Option<f64> = None;
    let mut worst = f64::NEG_INFINITY;
    for v in series {
        if let Some(p) = prev {
            worst = worst.max(v - p);
        }
        prev = Some(v);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowConfig, FlowMode};
    use crate::grid::{BoundaryData, DomainSpec};

    fn static_plane() -> Trajectory {
        let d = DomainSpec::interval(0.0, 1.0, 16, BoundaryKind::Neumann);
        run(&FlowConfig { snapshot_every: Some(0.01), ..FlowConfig::new(FlowMode::Neumann, 0.05) }, &GraphState::zeros(d, 1).unwrap())
            .unwrap()
    }

    #[test]
    fn plane_passes_everything() {
        let t = static_plane();
        for r in [
            check_displacement(&t).unwrap(),
            check_h_decay(&t).unwrap(),
            check_gradient_principle(&t).unwrap(),
            check_tame_curvature(&t).unwrap(),
        ] {
            assert!(r.pass, "{r:?}");
        }
        assert_eq!(check_h_decay(&t).unwrap().tolerance, 1e-12);
        assert!(matches!(check_dirichlet_boundary_h(&t, 1.0), Err(CheckError::Grid(GridError::WrongBoundary { .. }))));
    }

    fn interval_with(phi1: f64) -> GraphState {
        let d = DomainSpec::interval(0.0, 1.0, 8, BoundaryKind::Dirichlet);
        GraphState::zeros(d, 1).unwrap().with_dirichlet(BoundaryData::Fixed(vec![0.0, phi1])).unwrap()
    }

    #[test]
    fn acausality_by_hand() {
        let (d, ok) = check_acausal(&interval_with(0.5)).unwrap();
        assert!((d - 0.5).abs() < 1e-15 && ok);
        let (d, ok) = check_acausal(&interval_with(1.2)).unwrap();
        assert!((d + 0.2).abs() < 1e-15 && !ok);
        assert_eq!(check_acausal(&interval_with(0.0)).unwrap(), (1.0, true));
        assert!(acausal_delta_points(&[vec![0.0]], &[1.0], 1).is_err());
    }

    #[test]
    fn increases() {
        assert_eq!(max_increase([3.0, 2.0, 2.5, 1.0]), 0.5);
        assert_eq!(max_increase([1.0]), f64::NEG_INFINITY);
    }
}
