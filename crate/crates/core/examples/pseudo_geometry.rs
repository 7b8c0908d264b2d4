//! Pointwise geometry of a graph in R^{n,m}: induced metric, gradient
//! function, mean curvature and second fundamental form.
//!
//! `cargo run --example pseudo_geometry`

use spacelike_mcf::geometry::{causal_class, geometry_frame, AmbientVector, GraphJet, Signature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sig = Signature::new(2, 2)?;
    for v in [AmbientVector::new(vec![1.0, 0.0], vec![0.5, 0.0]), AmbientVector::new(vec![1.0, 0.0], vec![0.0, 1.0])] {
        println!("{v:?} is {:?}", causal_class(&v)?);
    }

    // the graph of u(x) = (0.3 x1 + 0.2 x1 x2, 0.1 x2^2) at x = (0.5, 1)
    let mut jet = GraphJet::zeros(2, 2);
    let (x1, x2) = (0.5, 1.0);
    jet.set_du(0, 0, 0.3 + 0.2 * x2);
    jet.set_du(1, 0, 0.2 * x1);
    jet.set_du(1, 1, 0.2 * x2);
    jet.set_d2u(0, 1, 0, 0.2);
    jet.set_d2u(1, 1, 1, 0.2);
    let pos = AmbientVector::new(vec![x1, x2], vec![0.3 * x1 + 0.2 * x1 * x2, 0.1 * x2 * x2]);
    let f = geometry_frame(&jet, &pos, sig)?;
    println!("eigenvalues of Du Du^T: {:?}", f.lambda);
    println!("v^2 = {:.6}  ||H||^2 = {:.6}  ||II||^2 = {:.6}", f.v2, f.h_norm2, f.ii_norm2);
    println!("H = {:?}", f.h_vector);
    Ok(())
}
