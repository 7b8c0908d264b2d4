//! The renormalized flow `X~ = X / sqrt(1 + 2t)`, `s = log(1 + 2t) / 2`,
//! whose fixed points are self-expanders `H~ = X~^perp`.

use serde::{Deserialize, Serialize};

use crate::error::{CheckError, GridError};
use crate::geometry::{geometry_frame, minkowski_ip, AmbientVector, Signature};
use crate::grid::{DomainSpec, GraphState, Stencils};

/// `(s, lambda)` for flow time `t`.
pub fn rescale_time(t: f64) -> (f64, f64) {
    (0.5 * (2.0 * t).ln_1p(), 1.0 / (1.0 + 2.0 * t).sqrt())
}

/// Flow time of rescaled time `s`.
pub fn flow_time(s: f64) -> f64 {
    0.5 * (2.0 * s).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledState {
    pub s: f64,
    pub lambda: f64,
    /// The rescaled graph on the rescaled grid: bounds and values are both
    /// multiplied by `lambda`, node for node.
    pub state: GraphState,
}

impl RescaledState {
    /// Cubic resampling of the rescaled graph onto another grid, which must
    /// lie inside the rescaled domain.
    pub fn resample_onto(&self, domain: &DomainSpec) -> Result<GraphState, GridError> {
        let m = self.state.m;
        let n = domain.n();
        let mut u = vec![0.0; domain.node_count() * m];
        for node in 0..domain.node_count() {
            let x = domain.coords(node);
            self.state.sample_cubic(&x[..n], &mut u[node * m..(node + 1) * m])?;
        }
        let mut out = GraphState::new(domain.clone(), m, self.state.t, u)?;
        out.provenance = self.state.provenance.clone();
        Ok(out)
    }

    /// Exact inverse of [`rescale`].
    pub fn unscale(&self) -> GraphState {
        scaled(&self.state, 1.0 / self.lambda)
    }
}

fn scaled(state: &GraphState, lambda: f64) -> GraphState {
    let mut out = state.clone();
    for b in &mut out.domain.bounds {
        b[0] *= lambda;
        b[1] *= lambda;
    }
    for v in &mut out.u {
        *v *= lambda;
    }
    out.dirichlet_data = None;
    out
}

pub fn rescale(state: &GraphState) -> RescaledState {
    let (s, lambda) = rescale_time(state.t);
    RescaledState { s, lambda, state: scaled(state, lambda) }
}

fn core_nodes(state: &GraphState, core_fraction: f64) -> Result<Vec<usize>, GridError> {
    let d = &state.domain;
    let n = d.n();
    let half = d.bounds.iter().map(|[lo, hi]| lo.abs().min(hi.abs())).fold(f64::INFINITY, f64::min);
    let r = core_fraction * half;
    let nodes: Vec<usize> = (0..d.node_count())
        .filter(|&k| {
            let x = d.coords(k);
            x[..n].iter().map(|v| v * v).sum::<f64>().sqrt() <= r
        })
        .collect();
    if nodes.is_empty() {
        return Err(GridError::InvalidDomain(format!("no nodes within {r} of the origin")));
    }
    Ok(nodes)
}

/// `||H - X^perp||^2` and `|X|^2` at each listed node of an (already rescaled) state.
fn residual_field(state: &GraphState, nodes: &[usize]) -> Result<Vec<(f64, f64)>, GridError> {
    let (n, m) = (state.n(), state.m);
    let sig = Signature { n, m };
    let st = Stencils::new(&state.domain);
    nodes
        .iter()
        .map(|&node| {
            let jet = st.jet(&state.u, m, node);
            let x = AmbientVector::new(state.domain.coords(node)[..n].to_vec(), state.value(node).to_vec());
            let frame = geometry_frame(&jet, &x, sig).map_err(|e| match e {
                crate::error::GeometryError::SpacelikeViolation { max_eigenvalue } => {
                    GridError::Spacelike { node, max_eigenvalue }
                }
                other => GridError::InvalidDomain(other.to_string()),
            })?;
            let d = frame.h_vector.sub(&frame.x_perp);
            let res = (-minkowski_ip(&d, &d, sig).expect("matching dimensions")).max(0.0);
            Ok((res, x.norm2()))
        })
        .collect()
}

/// Sup of `||H~ - X~^perp||^2` over `|x~| <= core_fraction * half-width`
/// of the rescaled grid, assumed centered at the origin.
pub fn expander_residual(state: &GraphState, core_fraction: f64) -> Result<f64, GridError> {
    let r = rescale(state);
    let nodes = core_nodes(&r.state, core_fraction)?;
    Ok(residual_field(&r.state, &nodes)?.into_iter().map(|p| p.0).fold(0.0, f64::max))
}

/// Per-node `||H~ - X~^perp||^2 / (n + 1 + |X~|^2)` over the core.
pub fn weighted_residual(state: &GraphState, core_fraction: f64) -> Result<Vec<f64>, GridError> {
    let r = rescale(state);
    let nodes = core_nodes(&r.state, core_fraction)?;
    let c = state.n() as f64 + 1.0;
    Ok(residual_field(&r.state, &nodes)?.into_iter().map(|(res, x2)| res / (c + x2)).collect())
}

/// A cone `U` with `U(lambda x) = lambda U(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConeProfile {
    /// `U(x) = |x| slope`.
    Radial { slope: Vec<f64> },
    /// `U(x) = A x` with `A` given as `m` rows of length `n`.
    Linear { matrix: Vec<Vec<f64>> },
}

impl ConeProfile {
    pub fn m(&self) -> usize {
        match self {
            Self::Radial { slope } => slope.len(),
            Self::Linear { matrix } => matrix.len(),
        }
    }

    /// Lipschitz constant of `U`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Radial { slope } => slope.iter().map(|s| s * s).sum::<f64>().sqrt(),
            Self::Linear { matrix } => {
                let rows = matrix.len();
                let cols = matrix.first().map_or(0, |r| r.len());
                let a = nalgebra::DMatrix::from_fn(rows, cols, |i, j| matrix[i][j]);
                a.singular_values().iter().cloned().fold(0.0, f64::max)
            }
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Radial { slope } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                for (o, s) in out.iter_mut().zip(slope) {
                    *o = s * r;
                }
            }
            Self::Linear { matrix } => {
                for (o, row) in out.iter_mut().zip(matrix) {
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
        }
    }
}

/// The smoothed cone `U(x) |x| / sqrt(|x|^2 + rho^2)`.
pub fn cone_initial_data(profile: &ConeProfile, rho: f64, domain: &DomainSpec) -> Result<GraphState, CheckError> {
    let lip = profile.lipschitz();
    if !(lip < 1.0) {
        return Err(CheckError::Precondition(format!("cone Lipschitz constant {lip} must be below 1")));
    }
    if !(rho > 0.0) {
        return Err(CheckError::Precondition(format!("smoothing radius {rho} must be positive")));
    }
    if let ConeProfile::Linear { matrix } = profile {
        if matrix.iter().any(|r| r.len() != domain.n()) {
            return Err(CheckError::Precondition("cone matrix rows must have length n".into()));
        }
    }
    Ok(GraphState::from_fn(domain.clone(), profile.m(), 0.0, |x, o| {
        profile.eval(x, o);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let w = r2.sqrt() / (r2 + rho * rho).sqrt();
        for v in o.iter_mut() {
            *v *= w;
        }
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;

    #[test]
    fn time_maps() {
        assert_eq!(rescale_time(0.0), (0.0, 1.0));
        let t = (std::f64::consts::E.powi(2) - 1.0) / 2.0;
        assert!((rescale_time(t).0 - 1.0).abs() < 1e-15);
        assert!((flow_time(1.0) - t).abs() < 1e-14);
    }

    #[test]
    fn identity_at_time_zero_and_exact_inverse() {
        let d = DomainSpec::interval(-2.0, 2.0, 16, BoundaryKind::Neumann);
        let s = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.3 * x[0].sin()).unwrap();
        assert_eq!(rescale(&s).state, s);
        let mut later = s.clone();
        later.t = 1.5;
        let r = rescale(&later);
        assert_eq!(r.lambda, 0.5);
        assert_eq!(r.unscale().u, later.u);
    }

    #[test]
    fn flat_plane_has_zero_residual() {
        let d = DomainSpec::cube(2, -2.0, 2.0, 8, BoundaryKind::Neumann);
        let mut s = GraphState::zeros(d, 2).unwrap();
        s.t = 0.7;
        assert_eq!(expander_residual(&s, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn cone_smoothing_by_hand() {
        let d = DomainSpec::interval(-10.0, 10.0, 40, BoundaryKind::Neumann);
        let lin = ConeProfile::Linear { matrix: vec![vec![0.5]] };
        let s = cone_initial_data(&lin, 1.0, &d).unwrap();
        let v = s.u[40];
        assert!((v - 0.5 * 100.0 / 101f64.sqrt()).abs() < 1e-12);
        assert!((v - 5.0).abs() < 0.025);
        let zero = cone_initial_data(&ConeProfile::Radial { slope: vec![0.0, 0.0] }, 1.0, &d).unwrap();
        assert!(zero.u.iter().all(|&x| x == 0.0));
        assert!(cone_initial_data(&ConeProfile::Radial { slope: vec![1.0] }, 1.0, &d).is_err());
    }
}
