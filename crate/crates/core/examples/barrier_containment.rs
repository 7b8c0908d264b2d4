//! Outer barriers along a flow: expanding quasi-spheres around a Neumann
//! run and a Yang Li barrier `f_{K, Lambda}` above Dirichlet data.
//!
//! `cargo run --release --example barrier_containment`

use std::f64::consts::PI;

use spacelike_mcf::flow::{FlowConfig, FlowMode, FlowRunner};
use spacelike_mcf::geometry::AmbientVector;
use spacelike_mcf::grid::{BoundaryKind, DomainSpec, GraphState};
use spacelike_mcf::solutions::{BarrierSpec, QuasiSphere, YangLiBarrier};
use spacelike_mcf::verify::check_barriers;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = BarrierSpec::QuasiSphere(QuasiSphere { center: AmbientVector::new(vec![0.5], vec![0.05]), r2: 0.1 });
    let d = DomainSpec::interval(0.0, 1.0, 32, BoundaryKind::Neumann);
    let u0 = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.1 * (PI * x[0]).cos())?;
    let cfg = FlowConfig { snapshot_every: Some(0.1), ..FlowConfig::new(FlowMode::Neumann, 1.0) };
    let traj = FlowRunner::new(&cfg).with_barriers(vec![q.clone()]).run(&u0)?;
    for r in traj.diagnostics.iter().step_by(500) {
        println!("quasi-sphere  t = {:.3}  margin = {:.6}", r.t, r.barrier_margins[0]);
    }
    println!("{:?}", check_barriers(&traj, &[q])?);

    let y = YangLiBarrier { xi: vec![-0.2], eta: vec![0.0], k: 5.0, lambda: -1.0 };
    println!("yang li barrier valid for r < {:.3}", y.r_max());
    for r in [0.2, 0.6, 1.2] {
        let (f, fp) = y.profile(r)?;
        println!("  f({r}) = {f:.6}  f'({r}) = {fp:.6}");
    }
    let d = DomainSpec::interval(0.0, 1.0, 32, BoundaryKind::Dirichlet);
    let u0 = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.5 * x[0] + 0.1 * (PI * x[0]).sin())?.with_current_boundary()?;
    let cfg = FlowConfig { snapshot_every: Some(0.1), ..FlowConfig::new(FlowMode::Dirichlet, 1.0) };
    let yb = BarrierSpec::YangLi(y);
    let traj = FlowRunner::new(&cfg).with_barriers(vec![yb.clone()]).run(&u0)?;
    println!("{:?}", check_barriers(&traj, &[yb])?);
    Ok(())
}
