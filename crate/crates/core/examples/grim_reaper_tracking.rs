//! The Grim Reaper `u = log cosh x + t` on `[-5, 5]` with exact boundary
//! values. Near `x = 5` the graph is almost lightlike and the explicit
//! stability limit is tiny, so this uses the Crank-Nicolson scheme.
//!
//! `cargo run --release --example grim_reaper_tracking`

use spacelike_mcf::flow::{cfl_dt, run, FlowConfig, FlowMode, Scheme};
use spacelike_mcf::grid::{BoundaryData, BoundaryKind, DomainSpec, GraphState};
use spacelike_mcf::solutions::{grim_reaper, ExactSolution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut prev: Option<f64> = None;
    for cells in [640usize, 1280, 2560] {
        let d = DomainSpec::interval(-5.0, 5.0, cells, BoundaryKind::ExactTracking);
        let s = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = grim_reaper(x[0], 0.0))?
            .with_dirichlet(BoundaryData::Exact(ExactSolution::GrimReaper))?;
        let explicit = cfl_dt(&s, 0.8)?;
        let cfg = FlowConfig { scheme: Scheme::CrankNicolson, fixed_dt: Some(5e-5), ..FlowConfig::new(FlowMode::Dirichlet, 0.5) };
        let traj = run(&cfg, &s)?;
        let last = traj.last();
        let err = (0..last.domain.node_count())
            .map(|k| (last.u[k] - grim_reaper(last.domain.coords(k)[0], last.t)).abs())
            .fold(0.0, f64::max);
        let ratio = prev.map(|p| format!("{:.2}", p / err)).unwrap_or_default();
        println!("h = 10/{cells:<5} explicit dt would be {explicit:.2e}; sup error at t = 0.5: {err:.3e} {ratio}");
        prev = Some(err);
    }
    Ok(())
}
