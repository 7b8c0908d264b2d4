//! Entire flow from a smoothed cone, followed in rescaled time.
//!
//! `cargo run --release --example entire_cone_renormalized -- [h] [lambda] [core]`

use std::time::Instant;

use spacelike_mcf::flow::{entire_solve_with_residual, FlowConfig, FlowMode};
use spacelike_mcf::grid::{BoundaryKind, DomainSpec};
use spacelike_mcf::renorm::{cone_initial_data, flow_time, rescale_time, ConeProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let h = args.first().copied().unwrap_or(0.125);
    let lambda = args.get(1).copied().unwrap_or(15.0);
    let core = args.get(2).copied().unwrap_or(0.25);
    let radii = vec![5.0, 10.0, 20.0];
    let half = radii[2] + lambda + 5.0;
    let cells = (2.0 * half / h).round() as usize;
    let domain = DomainSpec::interval(-half, half, cells, BoundaryKind::Neumann);
    let u0 = cone_initial_data(&ConeProfile::Radial { slope: vec![0.5] }, 1.0, &domain)?;

    let mut cfg = FlowConfig::new(FlowMode::Entire, flow_time(2.0));
    cfg.entire_radii = Some(radii);
    cfg.entire_lambda = Some(lambda);
    cfg.snapshot_every = Some(flow_time(2.0) / 8.0);

    let start = Instant::now();
    let res = entire_solve_with_residual(&cfg, &u0, core)?;
    println!("solved in {:.1?}", start.elapsed());
    println!("discrepancies on the core: {:?} (converged: {})", res.discrepancies, res.converged);
    let traj = res.trajectory();
    for (snap, r) in traj.snapshots.iter().zip(&traj.snapshot_residuals) {
        println!("s = {:6.3}  t = {:8.3}  residual = {r:.3e}", rescale_time(snap.t).0, snap.t);
    }
    Ok(())
}
