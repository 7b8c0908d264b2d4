use rayon::prelude::*;

use super::{FlowConfig, FlowRunner, Trajectory};
use crate::error::FlowError;
use crate::grid::{annulus_reflection_extend, GraphState};

#[derive(Debug, Clone, PartialEq)]
pub struct EntireResult {
    pub radii: Vec<f64>,
    /// One trajectory per truncation radius, with the origin offset restored.
    pub truncations: Vec<Trajectory>,
    /// Terminal sup-distance between consecutive truncations on the common
    /// core `|x| <= R_0 / 2`.
    pub discrepancies: Vec<f64>,
    pub converged: bool,
}

impl EntireResult {
    /// The largest truncation's trajectory.
    pub fn trajectory(&self) -> &Trajectory {
        self.truncations.last().expect("at least one truncation")
    }

    pub fn ensure_converged(&self) -> Result<(), FlowError> {
        if self.converged {
            Ok(())
        } else {
            Err(FlowError::TruncationNonConvergence { discrepancies: self.discrepancies.clone() })
        }
    }
}

fn core_distance(a: &GraphState, b: &GraphState, core: f64) -> Result<f64, FlowError> {
    let n = a.n();
    let m = a.m;
    let mut buf = vec![0.0; m];
    let mut worst: f64 = 0.0;
    for node in 0..a.domain.node_count() {
        let x = a.domain.coords(node);
        if x[..n].iter().map(|v| v * v).sum::<f64>().sqrt() > core {
            continue;
        }
        b.sample_linear(&x[..n], &mut buf)?;
        let d = a.value(node).iter().zip(&buf).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Approximates the entire flow from `u0` by Neumann flows on reflected
/// truncations of increasing radius (run in parallel). Non-decreasing
/// truncation discrepancies are reported through
/// [`EntireResult::converged`], not as an error.
pub fn entire_solve(config: &FlowConfig, u0: &GraphState) -> Result<EntireResult, FlowError> {
    solve(config, u0, None)
}

/// As [`entire_solve`], recording self-expander residuals at snapshots.
pub fn entire_solve_with_residual(config: &FlowConfig, u0: &GraphState, core_fraction: f64) -> Result<EntireResult, FlowError> {
    solve(config, u0, Some(core_fraction))
}

fn solve(config: &FlowConfig, u0: &GraphState, core_fraction: Option<f64>) -> Result<EntireResult, FlowError> {
    config.validate()?;
    let radii = config
        .entire_radii
        .clone()
        .ok_or_else(|| FlowError::InvalidConfig("entire mode needs entire_radii".into()))?;
    let lambda = config.entire_lambda.unwrap_or(1.0);
    let n = u0.n();
    let mut offset = vec![0.0; u0.m];
    u0.sample_linear(&vec![0.0; n], &mut offset)?;

    let truncations: Vec<Trajectory> = radii
        .par_iter()
        .map(|&r| {
            let ext = annulus_reflection_extend(u0, r, lambda)?;
            let mut runner = FlowRunner::new(config);
            if let Some(f) = core_fraction {
                runner = runner.with_expander_residual(f);
            }
            let mut traj = runner.run(&ext)?;
            for snap in &mut traj.snapshots {
                for (k, v) in snap.u.iter_mut().enumerate() {
                    *v += offset[k % offset.len()];
                }
            }
            Ok(traj)
        })
        .collect::<Result<_, FlowError>>()?;

    let core = 0.5 * radii[0];
    let discrepancies = truncations
        .windows(2)
        .map(|w| core_distance(w[0].last(), w[1].last(), core))
        .collect::<Result<Vec<_>, _>>()?;
    let converged = discrepancies.windows(2).all(|w| w[1] < w[0] || (w[1] == 0.0 && w[0] == 0.0));
    Ok(EntireResult { radii, truncations, discrepancies, converged })
}
