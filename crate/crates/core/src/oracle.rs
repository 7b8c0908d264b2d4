//! Discrete residuals of closed-form solutions and grid refinement studies.

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::geometry::kernel;
use crate::grid::{BoundaryKind, DomainSpec, GraphState, Stencils};
use crate::solutions::ExactSolution;

/// `max |u_t - g^{ij}(D_h u) D_h^2 u|` over every node of `domain`, with
/// `u` the exact solution sampled at time `t` and `u_t` its exact time
/// derivative. Pinned domains exercise the one-sided boundary stencils.
pub fn discrete_residual(solution: ExactSolution, domain: &DomainSpec, t: f64) -> Result<f64, GridError> {
    let m = 1;
    let state = GraphState::from_fn(domain.clone(), m, t, |x, o| solution.value(x, t, o))?;
    let n = domain.n();
    let st = Stencils::new(domain);
    let (mut du, mut d2u, mut v) = (vec![0.0; n], vec![0.0; n * n], [0.0]);
    let mut worst: f64 = 0.0;
    for node in 0..domain.node_count() {
        st.jet_into(&state.u, m, node, &mut du, &mut d2u);
        let met = kernel::metric(&du, n, m);
        if !met.is_spacelike() {
            return Err(GridError::Spacelike { node, max_eigenvalue: met.max_lambda() });
        }
        kernel::velocity(&met, &d2u, n, m, &mut v);
        let x = &domain.coords(node)[..n];
        worst = worst.max((solution.time_derivative(x, t) - v[0]).abs());
    }
    Ok(worst)
}

/// Residuals over a ladder of spacings; each entry is the worst residual
/// over the sampled times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub solution: ExactSolution,
    pub n: usize,
    pub bounds: [f64; 2],
    pub times: Vec<f64>,
    pub spacings: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Observed order between consecutive spacings.
    pub pairwise_orders: Vec<f64>,
    /// Least-squares slope of `log residual` against `log h`.
    pub fitted_order: f64,
}

impl RefinementStudy {
    pub fn order_within(&self, target: f64, tol: f64) -> bool {
        (self.fitted_order - target).abs() <= tol && self.pairwise_orders.iter().all(|o| (o - target).abs() <= tol)
    }
}

pub fn fit_order(spacings: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Refinement study on the cube `[lo, hi]^n` with Dirichlet-type stencils.
/// Each spacing must divide the side length.
pub fn refinement_study(
    solution: ExactSolution,
    n: usize,
    bounds: [f64; 2],
    times: &[f64],
    spacings: &[f64],
) -> Result<RefinementStudy, GridError> {
    if spacings.len() < 2 {
        return Err(GridError::InvalidDomain("a refinement study needs at least two spacings".into()));
    }
    if solution == ExactSolution::GrimReaper && n != 1 {
        return Err(GridError::InvalidDomain("the grim reaper is a curve: n must be 1".into()));
    }
    let mut residuals = Vec::with_capacity(spacings.len());
    for &h in spacings {
        let cells = ((bounds[1] - bounds[0]) / h).round() as usize;
        if cells < 3 || ((bounds[1] - bounds[0]) / cells as f64 - h).abs() > 1e-12 * h {
            return Err(GridError::InvalidDomain(format!("spacing {h} does not divide {bounds:?}")));
        }
        let domain = DomainSpec::cube(n, bounds[0], bounds[1], cells, BoundaryKind::Dirichlet);
        domain.validate()?;
        let mut worst: f64 = 0.0;
        for &t in times {
            worst = worst.max(discrete_residual(solution, &domain, t)?);
        }
        residuals.push(worst);
    }
    let pairwise_orders =
        spacings.windows(2).zip(residuals.windows(2)).map(|(h, r)| (r[0] / r[1]).ln() / (h[0] / h[1]).ln()).collect();
    Ok(RefinementStudy {
        solution,
        n,
        bounds,
        times: times.to_vec(),
        spacings: spacings.to_vec(),
        fitted_order: fit_order(spacings, &residuals),
        residuals,
        pairwise_orders,
    })
}
