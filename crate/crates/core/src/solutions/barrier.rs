use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::RangeError;
use crate::geometry::AmbientVector;
use crate::grid::{DomainSpec, GraphState};

const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BarrierSpec {
    QuasiSphere(QuasiSphere),
    YangLi(YangLiBarrier),
}

/// The expanding family `|p - x|^2 = -R^2 - 2nt` centered at `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiSphere {
    pub center: AmbientVector,
    pub r2: f64,
}

impl QuasiSphere {
    /// `|p - X|^2 + R^2 + 2nt` for the graph point `X = (x, u)`.
    pub fn value_at(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        let s: f64 = x.iter().zip(&self.center.spatial).map(|(a, b)| (a - b) * (a - b)).sum();
        let v: f64 = u.iter().zip(&self.center.vertical).map(|(a, b)| (a - b) * (a - b)).sum();
        s - v + self.r2 + 2.0 * x.len() as f64 * t
    }

    /// Minimum over nodes; nonnegative exactly when the graph lies inside
    /// the quasi-sphere at the state's time.
    pub fn margin(&self, state: &GraphState) -> f64 {
        let n = state.n();
        (0..state.domain.node_count())
            .map(|node| self.value_at(&state.domain.coords(node)[..n], state.value(node), state.t))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Rotationally symmetric barrier `w = f_{K,L}(r)` around `(xi, eta)`,
/// where `r = |x - xi|` and `w = |u - eta|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YangLiBarrier {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub k: f64,
    pub lambda: f64,
}

impl YangLiBarrier {
    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.xi.is_empty() || self.eta.is_empty() {
            return Err("barrier centers must be nonempty".into());
        }
        if !(self.k > 0.0) {
            return Err(format!("K = {} must be positive", self.k));
        }
        if !(self.lambda <= 0.0) {
            return Err(format!("Lambda = {} must be nonpositive", self.lambda));
        }
        Ok(())
    }

    /// Upper end of the validity range, `(nK/|L|)^(1/n)`.
    pub fn r_max(&self) -> f64 {
        if self.lambda == 0.0 {
            f64::INFINITY
        } else {
            let n = self.n() as f64;
            (n * self.k / self.lambda.abs()).powf(1.0 / n)
        }
    }

    fn numerator(&self, t: f64) -> f64 {
        let n = self.n() as i32;
        self.k + self.lambda * t.powi(n) / n as f64
    }

    fn integrand(&self, t: f64) -> f64 {
        let a = self.numerator(t);
        let n = self.n() as i32;
        let lead = if n == 1 { 1.0 } else { t.powi(2 * n - 2) };
        let d = (lead + a * a).sqrt();
        if d == 0.0 {
            1.0
        } else {
            a / d
        }
    }

    /// `f'(r) = a / sqrt(1 + a^2)` with `a = K r^(1-n) + L r / n`.
    pub fn slope(&self, r: f64) -> Result<f64, RangeError> {
        self.check(r)?;
        let n = self.n() as i32;
        if r == 0.0 {
            return Ok(if n == 1 { self.k / (1.0 + self.k * self.k).sqrt() } else { 1.0 });
        }
        let a = self.k * r.powi(1 - n) + self.lambda * r / n as f64;
        Ok(a / (1.0 + a * a).sqrt())
    }

    /// `(f(r), f'(r))`, with `f` integrated to `1e-10`.
    pub fn profile(&self, r: f64) -> Result<(f64, f64), RangeError> {
        let fp = self.slope(r)?;
        Ok((integrate(|t| self.integrand(t), 0.0, r, QUAD_TOL), fp))
    }

    fn check(&self, r: f64) -> Result<(), RangeError> {
        let max = self.r_max();
        if !(r >= 0.0 && r < max) {
            return Err(RangeError { r, max });
        }
        Ok(())
    }

    fn radius(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `f(r(x))` at every node of the domain.
    pub fn node_profiles(&self, domain: &DomainSpec) -> Result<Vec<f64>, RangeError> {
        let n = domain.n();
        (0..domain.node_count())
            .map(|node| self.profile(self.radius(&domain.coords(node)[..n])).map(|p| p.0))
            .collect()
    }

    /// `min (f(r) - w)` using precomputed node profiles.
    pub fn margin_with(&self, profiles: &[f64], state: &GraphState) -> f64 {
        profiles
            .iter()
            .enumerate()
            .map(|(node, f)| {
                let w = state.value(node).iter().zip(&self.eta).map(|(u, e)| (u - e) * (u - e)).sum::<f64>().sqrt();
                f - w
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum over nodes of `f(r) - w`; nonnegative exactly when the graph
    /// lies under the barrier.
    pub fn margin(&self, state: &GraphState) -> Result<f64, RangeError> {
        Ok(self.margin_with(&self.node_profiles(&state.domain)?, state))
    }
}
