//! Snapshots are taken on step boundaries, so restarting from one continues
//! bit for bit like the uninterrupted run.
//!
//! `cargo run --release --example snapshot_replay`

use std::f64::consts::PI;

use spacelike_mcf::flow::{run, FlowConfig, FlowMode};
use spacelike_mcf::grid::{BoundaryKind, DomainSpec, GraphState};
use spacelike_mcf::io::{snapshot_from_json, snapshot_to_json};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = DomainSpec::cube(2, 0.0, 1.0, 24, BoundaryKind::Dirichlet);
    let u0 = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.3 * x[0] + 0.1 * (PI * x[0]).sin() * (PI * x[1]).sin())?
        .with_current_boundary()?;
    let cfg = FlowConfig { snapshot_every: Some(0.02), ..FlowConfig::new(FlowMode::Dirichlet, 0.1) };
    let full = run(&cfg, &u0)?;

    let mid = &full.snapshots[full.snapshots.len() / 2];
    let text = snapshot_to_json(mid)?;
    println!("snapshot at t = {} (step {}) is {} bytes of JSON", mid.t, mid.provenance.step, text.len());
    let resumed = run(&cfg, &snapshot_from_json(&text)?)?;

    let a = full.last();
    let b = resumed.last();
    let same = a.t == b.t && a.u.iter().zip(&b.u).all(|(x, y)| x.to_bits() == y.to_bits());
    println!("final t = {} vs {}; bit-identical: {same}", a.t, b.t);
    Ok(())
}
