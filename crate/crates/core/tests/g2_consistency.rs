use spacelike_mcf::flow::{cfl_dt, step, Scheme};
use spacelike_mcf::g2::{check_closed, immersion_to_phi, torsion, wedge_pairing};
use spacelike_mcf::grid::{derivatives, BoundaryKind, DomainSpec, GraphState};

fn bumpy(cells: usize) -> GraphState {
    let d = DomainSpec::cube(3, 0.0, 1.0, cells, BoundaryKind::Dirichlet);
    GraphState::from_fn(d, 3, 0.0, |x, out| {
        let bump = (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin() * (std::f64::consts::PI * x[2]).sin();
        out[0] = 0.2 * x[1] + 0.05 * bump;
        out[1] = -0.1 * x[2] + 0.03 * bump;
        out[2] = 0.15 * x[0] - 0.04 * bump;
    })
    .unwrap()
    .with_current_boundary()
    .unwrap()
}

// A flow step moves phi by dt times d(velocity), so phi stays closed and
// its slot increments match the discrete gradient of the velocity.
#[test]
fn flow_step_commutes_with_phi() {
    let s0 = bumpy(12);
    let dt = cfl_dt(&s0, 0.8).unwrap();
    let s1 = step(&s0, dt, Scheme::Euler).unwrap();
    let (p0, p1) = (immersion_to_phi(&s0).unwrap(), immersion_to_phi(&s1).unwrap());
    let h = s0.domain.h_max();
    assert!(check_closed(&p0) <= h * h);
    assert!(check_closed(&p1) <= h * h);

    let vel = GraphState::new(s0.domain.clone(), 3, 0.0, s0.u.iter().zip(&s1.u).map(|(a, b)| (b - a) / dt).collect()).unwrap();
    let wb = spacelike_mcf::g2::omega_bar_basis();
    let mut worst: f64 = 0.0;
    for node in s0.domain.evolved_nodes() {
        let jv = derivatives(&vel, node);
        for i in 0..3 {
            for c in 0..6 {
                let want: f64 = (0..3).map(|a| jv.du(i, a) * wb[a][c]).sum();
                let got = (p1.slots[node][i][c] - p0.slots[node][i][c]) / dt;
                worst = worst.max((got - want).abs());
            }
        }
    }
    assert!(worst < 1e-8, "slot drift {worst}");
}

#[test]
fn torsion_form_norm_matches_mean_curvature() {
    let s = bumpy(10);
    let tau = torsion(&s).unwrap();
    assert!(tau.sup_norm2() > 0.0);
    for k in 0..tau.nodes.len() {
        let h2 = tau.h_norm2[k];
        assert!((tau.form_norm2(k) - h2).abs() <= 1e-12 * (1.0 + h2), "node {}", tau.nodes[k]);
        assert!(-0.5 * wedge_pairing(&tau.forms[k], &tau.forms[k]) >= -1e-14);
    }
}

#[test]
fn other_signatures_are_refused() {
    let d = DomainSpec::cube(2, 0.0, 1.0, 6, BoundaryKind::Dirichlet);
    let s = GraphState::zeros(d, 3).unwrap();
    assert!(immersion_to_phi(&s).is_err());
    assert!(torsion(&s).is_err());
}
