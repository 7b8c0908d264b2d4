//! A graph `[0,1]^3 -> R^{3,3}` flowed to its maximal limit, read as a
//! closed G2-structure on `B x T^4` whose torsion is the mean curvature.
//!
//! `cargo run --release --example g2_laplacian_flow`

use std::f64::consts::PI;

use spacelike_mcf::flow::{run, FlowConfig, FlowMode};
use spacelike_mcf::g2::{check_closed, immersion_to_phi, torsion};
use spacelike_mcf::grid::{BoundaryKind, DomainSpec, GraphState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = DomainSpec::cube(3, 0.0, 1.0, 16, BoundaryKind::Dirichlet);
    let u0 = GraphState::from_fn(d, 3, 0.0, |x, o| {
        let bump = (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin();
        o.copy_from_slice(&[0.5 * x[0] + 0.1 * bump, 0.1 * x[1] * x[2], 0.0]);
    })?
    .with_current_boundary()?;
    let cfg = FlowConfig { snapshot_every: Some(0.05), steady_state_tol: Some(1e-3), ..FlowConfig::new(FlowMode::Dirichlet, 2.0) };
    let traj = run(&cfg, &u0)?;
    for s in &traj.snapshots {
        let phi = immersion_to_phi(s)?;
        let tau = torsion(s)?;
        let centre = s.domain.node(&[8, 8, 8]);
        println!(
            "t = {:.3}  |d phi| = {:.1e}  sup torsion = {:.3e}  phi_x1x2x3 at centre = {:.6}",
            s.t,
            check_closed(&phi),
            tau.sup_norm2(),
            phi.vol[centre]
        );
    }
    let json = immersion_to_phi(traj.last())?.to_json();
    println!("convention: {}", json["convention"]);
    Ok(())
}
