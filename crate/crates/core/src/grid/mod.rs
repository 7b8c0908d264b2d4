//! Structured node-centered grids over intervals and boxes, the graph
//! state carried on them, and finite-difference derivatives.
//!
//! Nodes are stored row-major with axis 0 slowest; a state holds `m`
//! consecutive values per node, `u[node * m + a]`.

mod ops;
mod stencil;

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::solutions::ExactSolution;

pub use ops::{annulus_reflection_extend, neumann_ghost_fill, reflected_profile, PaddedArray};
pub use stencil::{derivatives, Stencils};

/// Largest supported base dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Box,
    EntireTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Neumann,
    Dirichlet,
    /// Dirichlet values taken from a closed-form solution at the current time.
    ExactTracking,
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Neumann => "neumann",
            Self::Dirichlet => "dirichlet",
            Self::ExactTracking => "exact_tracking",
        }
    }

    /// Whether boundary nodes are pinned rather than evolved.
    pub fn is_pinned(&self) -> bool {
        !matches!(self, Self::Neumann)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// `[lo, hi]` per axis.
    pub bounds: Vec<[f64; 2]>,
    /// Number of cells per axis; an axis carries `resolution + 1` nodes.
    pub resolution: Vec<usize>,
    pub boundary: BoundaryKind,
}

impl DomainSpec {
    pub fn interval(lo: f64, hi: f64, cells: usize, boundary: BoundaryKind) -> Self {
        Self { kind: DomainKind::Interval, bounds: vec![[lo, hi]], resolution: vec![cells], boundary }
    }

    pub fn cube(n: usize, lo: f64, hi: f64, cells: usize, boundary: BoundaryKind) -> Self {
        let kind = if n == 1 { DomainKind::Interval } else { DomainKind::Box };
        Self { kind, bounds: vec![[lo, hi]; n], resolution: vec![cells; n], boundary }
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let n = self.n();
        let bad = |s: String| Err(GridError::InvalidDomain(s));
        if n == 0 || n > MAX_DIM {
            return bad(format!("dimension {n} not in 1..={MAX_DIM}"));
        }
        if self.resolution.len() != n {
            return bad(format!("{} resolutions for {n} axes", self.resolution.len()));
        }
        if self.kind == DomainKind::Interval && n != 1 {
            return bad("interval domains are one-dimensional".into());
        }
        if self.kind == DomainKind::EntireTruncation && self.boundary != BoundaryKind::Neumann {
            return bad("entire truncations carry neumann boundary".into());
        }
        for (k, (&[lo, hi], &r)) in self.bounds.iter().zip(&self.resolution).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("axis {k}: bounds [{lo}, {hi}]"));
            }
            if r < 3 {
                return bad(format!("axis {k}: resolution {r} below 3"));
            }
        }
        let hs: Vec<f64> = (0..n).map(|k| self.spacing(k)).collect();
        let hmax = hs.iter().cloned().fold(0.0, f64::max);
        let hmin = hs.iter().cloned().fold(f64::INFINITY, f64::min);
        if hmax > 4.0 * hmin {
            return bad(format!("spacing aspect {} exceeds 4", hmax / hmin));
        }
        Ok(())
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [lo, hi] = self.bounds[axis];
        (hi - lo) / self.resolution[axis] as f64
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n()).map(|k| self.spacing(k)).fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n()).map(|k| self.spacing(k)).fold(0.0, f64::max)
    }

    /// Nodes per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.resolution.iter().map(|r| r + 1).collect()
    }

    pub fn node_count(&self) -> usize {
        self.resolution.iter().map(|r| r + 1).product()
    }

    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0; MAX_DIM];
        let n = self.n();
        let mut acc = 1;
        for k in (0..n).rev() {
            s[k] = acc;
            acc *= self.resolution[k] + 1;
        }
        s
    }

    pub fn multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = node;
        for k in (0..self.n()).rev() {
            let len = self.resolution[k] + 1;
            idx[k] = rest % len;
            rest /= len;
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        let s = self.strides();
        idx.iter().zip(&s).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(node);
        let mut x = [0.0; MAX_DIM];
        for k in 0..self.n() {
            x[k] = self.bounds[k][0] + idx[k] as f64 * self.spacing(k);
        }
        x
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let idx = self.multi_index(node);
        (0..self.n()).any(|k| idx[k] == 0 || idx[k] == self.resolution[k])
    }

    /// Boundary nodes in increasing node order. Dirichlet data is stored in
    /// this order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Nodes whose values are evolved by the flow.
    pub fn evolved_nodes(&self) -> Vec<usize> {
        if self.boundary.is_pinned() {
            (0..self.node_count()).filter(|&i| !self.is_boundary(i)).collect()
        } else {
            (0..self.node_count()).collect()
        }
    }
}

/// Values imposed on the boundary of a Dirichlet or exact-tracking domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryData {
    /// `m` values per boundary node, in [`DomainSpec::boundary_nodes`] order.
    Fixed(Vec<f64>),
    Exact(ExactSolution),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphState {
    pub domain: DomainSpec,
    pub m: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub dirichlet_data: Option<BoundaryData>,
    pub provenance: Provenance,
}

impl GraphState {
    pub fn new(domain: DomainSpec, m: usize, t: f64, u: Vec<f64>) -> Result<Self, GridError> {
        domain.validate()?;
        if m == 0 {
            return Err(GridError::InvalidDomain("codimension must be at least 1".into()));
        }
        let expected = domain.node_count() * m;
        if u.len() != expected {
            return Err(GridError::LengthMismatch { expected, found: u.len() });
        }
        Ok(Self { domain, m, t, u, dirichlet_data: None, provenance: Provenance::default() })
    }

    pub fn zeros(domain: DomainSpec, m: usize) -> Result<Self, GridError> {
        let len = domain.node_count() * m;
        Self::new(domain, m, 0.0, vec![0.0; len])
    }

    /// Samples `f(x, out)` at every node.
    pub fn from_fn(domain: DomainSpec, m: usize, t: f64, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self, GridError> {
        domain.validate()?;
        let n = domain.n();
        let mut u = vec![0.0; domain.node_count() * m];
        for (node, chunk) in u.chunks_mut(m).enumerate() {
            let x = domain.coords(node);
            f(&x[..n], chunk);
        }
        Self::new(domain, m, t, u)
    }

    pub fn with_dirichlet(mut self, data: BoundaryData) -> Result<Self, GridError> {
        if let BoundaryData::Fixed(v) = &data {
            let expected = self.domain.boundary_nodes().len() * self.m;
            if v.len() != expected {
                return Err(GridError::LengthMismatch { expected, found: v.len() });
            }
        }
        self.dirichlet_data = Some(data);
        Ok(self)
    }

    /// Pins the current boundary values as fixed Dirichlet data.
    pub fn with_current_boundary(self) -> Result<Self, GridError> {
        let m = self.m;
        let data: Vec<f64> = self
            .domain
            .boundary_nodes()
            .iter()
            .flat_map(|&b| self.u[b * m..(b + 1) * m].iter().copied())
            .collect();
        self.with_dirichlet(BoundaryData::Fixed(data))
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.u[node * self.m..(node + 1) * self.m]
    }

    /// Boundary values at time `t`, `m` per boundary node.
    pub fn boundary_values(&self, t: f64) -> Result<Vec<f64>, GridError> {
        let m = self.m;
        let n = self.n();
        match &self.dirichlet_data {
            None => Err(GridError::MissingDirichletData),
            Some(BoundaryData::Fixed(v)) => Ok(v.clone()),
            Some(BoundaryData::Exact(sol)) => {
                let nodes = self.domain.boundary_nodes();
                let mut out = vec![0.0; nodes.len() * m];
                for (k, &b) in nodes.iter().enumerate() {
                    let x = self.domain.coords(b);
                    sol.value(&x[..n], t, &mut out[k * m..(k + 1) * m]);
                }
                Ok(out)
            }
        }
    }

    /// Overwrites boundary nodes with the Dirichlet data at the state's time.
    pub fn dirichlet_apply(&self) -> Result<GraphState, GridError> {
        let mut out = self.clone();
        out.dirichlet_apply_in_place()?;
        Ok(out)
    }

    pub fn dirichlet_apply_in_place(&mut self) -> Result<(), GridError> {
        let vals = self.boundary_values(self.t)?;
        let m = self.m;
        for (k, b) in self.domain.boundary_nodes().into_iter().enumerate() {
            self.u[b * m..(b + 1) * m].copy_from_slice(&vals[k * m..(k + 1) * m]);
        }
        Ok(())
    }

    /// Sup over nodes of the Euclidean norm of the vertical values.
    pub fn sup_norm(&self) -> f64 {
        self.u
            .chunks(self.m)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Multilinear interpolation at `x`.
    pub fn sample_linear(&self, x: &[f64], out: &mut [f64]) -> Result<(), GridError> {
        self.sample_with(x, out, 2)
    }

    /// Tensor-product cubic Lagrange interpolation at `x`, with the
    /// four-point window shifted inward near the boundary.
    pub fn sample_cubic(&self, x: &[f64], out: &mut [f64]) -> Result<(), GridError> {
        self.sample_with(x, out, 4)
    }

    fn sample_with(&self, x: &[f64], out: &mut [f64], points: usize) -> Result<(), GridError> {
        let n = self.n();
        let m = self.m;
        if x.len() != n || out.len() != m {
            return Err(GridError::LengthMismatch { expected: n, found: x.len() });
        }
        let mut idx = [[0usize; 4]; MAX_DIM];
        let mut w = [[0.0; 4]; MAX_DIM];
        for k in 0..n {
            let [lo, hi] = self.domain.bounds[k];
            let h = self.domain.spacing(k);
            let slack = 1e-12 * (hi - lo);
            if !(x[k] >= lo - slack && x[k] <= hi + slack) {
                return Err(GridError::OutOfDomain);
            }
            let s = ((x[k] - lo) / h).clamp(0.0, self.domain.resolution[k] as f64);
            let last = self.domain.resolution[k];
            let cell = (s.floor() as usize).min(last - 1);
            let start = if points == 2 { cell } else { cell.saturating_sub(1).min(last + 1 - points) };
            for p in 0..points {
                idx[k][p] = start + p;
            }
            for p in 0..points {
                let xp = (start + p) as f64;
                let mut l = 1.0;
                for q in 0..points {
                    if q != p {
                        l *= (s - (start + q) as f64) / (xp - (start + q) as f64);
                    }
                }
                w[k][p] = l;
            }
        }
        out.fill(0.0);
        let strides = self.domain.strides();
        let total = points.pow(n as u32);
        for combo in 0..total {
            let mut rest = combo;
            let mut node = 0;
            let mut weight = 1.0;
            for k in 0..n {
                let p = rest % points;
                rest /= points;
                node += idx[k][p] * strides[k];
                weight *= w[k][p];
            }
            if weight != 0.0 {
                for a in 0..m {
                    out[a] += weight * self.u[node * m + a];
                }
            }
        }
        Ok(())
    }
}
