use serde::{Deserialize, Serialize};

use crate::error::TimeError;
use crate::geometry::GraphJet;

/// `log cosh x`, stable for large `|x|`.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// The translating Grim Reaper curve `log cosh x + t`.
pub fn grim_reaper(x: f64, t: f64) -> f64 {
    log_cosh(x) + t
}

/// Graph of the hyperbolic expander `sqrt(|x|^2 + 2nt)` over R^n.
pub fn hyperbolic_expander(x: &[f64], t: f64, n: usize) -> Result<f64, TimeError> {
    if !(t > 0.0) {
        return Err(TimeError { t });
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((r2 + 2.0 * n as f64 * t).sqrt())
}

/// Closed-form solutions usable as initial data, boundary data and oracles.
/// The profile occupies the first vertical component; the others vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactSolution {
    /// `log cosh x_1 + t`, constant in the remaining coordinates.
    GrimReaper,
    /// `sqrt(|x|^2 + 2nt)`; the light cone at `t = 0`.
    HyperbolicExpander,
}

impl ExactSolution {
    pub fn profile(&self, x: &[f64], t: f64) -> f64 {
        match self {
            Self::GrimReaper => grim_reaper(x[0], t),
            Self::HyperbolicExpander => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (r2 + 2.0 * x.len() as f64 * t).sqrt()
            }
        }
    }

    pub fn value(&self, x: &[f64], t: f64, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = self.profile(x, t);
    }

    pub fn time_derivative(&self, x: &[f64], t: f64) -> f64 {
        match self {
            Self::GrimReaper => 1.0,
            Self::HyperbolicExpander => x.len() as f64 / self.profile(x, t),
        }
    }

    /// Analytic first and second derivatives.
    pub fn jet(&self, x: &[f64], t: f64, m: usize) -> GraphJet {
        let n = x.len();
        let mut jet = GraphJet::zeros(n, m);
        match self {
            Self::GrimReaper => {
                let th = x[0].tanh();
                jet.set_du(0, 0, th);
                jet.set_d2u(0, 0, 0, 1.0 - th * th);
            }
            Self::HyperbolicExpander => {
                let u = self.profile(x, t);
                for i in 0..n {
                    jet.set_du(i, 0, x[i] / u);
                    for j in i..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        jet.set_d2u(i, j, 0, delta / u - x[i] * x[j] / (u * u * u));
                    }
                }
            }
        }
        jet
    }
}
