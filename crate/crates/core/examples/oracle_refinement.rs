//! Discrete PDE residual of the closed-form solutions under grid refinement.
//!
//! `cargo run --release --example oracle_refinement`

use spacelike_mcf::oracle::refinement_study;
use spacelike_mcf::solutions::ExactSolution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spacings = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let studies = [
        refinement_study(ExactSolution::GrimReaper, 1, [-5.0, 5.0], &[0.0, 0.5], &spacings)?,
        refinement_study(ExactSolution::HyperbolicExpander, 1, [-2.0, 2.0], &[0.1, 0.25, 0.5, 1.0], &spacings)?,
        refinement_study(ExactSolution::HyperbolicExpander, 2, [-1.0, 1.0], &[0.5], &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0])?,
    ];
    for s in &studies {
        println!("{:?} (n = {}) on {:?}", s.solution, s.n, s.bounds);
        for (h, r) in s.spacings.iter().zip(&s.residuals) {
            println!("  h = {h:<10.6} residual = {r:.4e}");
        }
        println!("  pairwise orders {:?}, fitted order {:.3}", s.pairwise_orders, s.fitted_order);
    }
    Ok(())
}
