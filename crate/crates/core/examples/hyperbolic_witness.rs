//! The hyperbolic expander `u = sqrt(|x|^2 + 2nt)` saturates the height and
//! mean-curvature decay estimates. Starting from `t0 = 0.1`, the computed
//! flow is compared with both bounds.
//!
//! `cargo run --release --example hyperbolic_witness`

use spacelike_mcf::flow::{run, FlowConfig, FlowMode};
use spacelike_mcf::grid::{BoundaryData, BoundaryKind, DomainSpec, GraphState};
use spacelike_mcf::solutions::ExactSolution;
use spacelike_mcf::verify::{check_displacement, check_h_decay, check_tame_curvature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sol = ExactSolution::HyperbolicExpander;
    let t0 = 0.1;
    let d = DomainSpec::interval(-1.0, 1.0, 128, BoundaryKind::ExactTracking);
    let u0 = GraphState::from_fn(d.clone(), 1, t0, |x, o| sol.value(x, t0, o))?.with_dirichlet(BoundaryData::Exact(sol))?;
    let cfg = FlowConfig { snapshot_every: Some(0.1), ..FlowConfig::new(FlowMode::Dirichlet, 1.0) };
    let traj = run(&cfg, &u0)?;

    let tip = d.node(&[64]);
    for s in &traj.snapshots {
        println!("t = {:.2}  tip height {:.6}  sqrt(2t) = {:.6}", s.t, s.u[tip], (2.0 * s.t).sqrt());
    }
    println!("{:?}", check_h_decay(&traj)?);

    // measured from the cone |x|, the t = 0 limit of the family
    let mut from_cone = traj.clone();
    from_cone.snapshots[0] = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = x[0].abs())?;
    println!("{:?}", check_displacement(&from_cone)?);
    println!("{:?}", check_tame_curvature(&from_cone)?);
    Ok(())
}
