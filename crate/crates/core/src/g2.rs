//! Closed T^4-invariant G2-structures on B x T^4 from spacelike graphs
//! B -> R^{3,3}.
//!
//! Two-forms on T^4 are stored in the basis
//! `{dy0^dy1, dy0^dy2, dy0^dy3, dy2^dy3, dy3^dy1, dy1^dy2}`. The spacelike
//! basis vector `f_i` of R^{3,3} is identified with the self-dual form
//! `w_i` and the timelike `e_A` with the anti-self-dual `wbar_A`; the
//! quadratic form of R^{3,3} is then half the wedge pairing on a unit
//! volume torus. With this choice the identity graph gives the standard
//! `phi_0` coefficient for coefficient.

use serde_json::{json, Map, Value};

use crate::error::GeometryError;
use crate::geometry::{geometry_frame, AmbientVector, GraphJet, Signature};
use crate::grid::{DomainSpec, GraphState, Stencils};

pub type Form2 = [f64; 6];

pub const CONVENTION: &str = "f_i <-> w_i, e_A <-> wbar_A, <X, Y> = (1/2) int_T4 X ^ Y, vol(T4) = 1";

/// `int_{T^4} a ^ b` on the unit-volume torus.
pub fn wedge_pairing(a: &Form2, b: &Form2) -> f64 {
    a[0] * b[3] + a[3] * b[0] + a[1] * b[4] + a[4] * b[1] + a[2] * b[5] + a[5] * b[2]
}

/// The self-dual forms `w_1, w_2, w_3`.
pub fn omega_basis() -> [Form2; 3] {
    [[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 1.0, 0.0, 0.0, 1.0]]
}

/// The anti-self-dual partners, with the second term's sign flipped.
pub fn omega_bar_basis() -> [Form2; 3] {
    [[1.0, 0.0, 0.0, -1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 1.0, 0.0, 0.0, -1.0]]
}

/// Image of a vector of R^{3,3} in H^2(T^4).
pub fn to_form(v: &AmbientVector) -> Form2 {
    let (w, wb) = (omega_basis(), omega_bar_basis());
    let mut out = [0.0; 6];
    for k in 0..3 {
        for c in 0..6 {
            out[c] += v.spatial[k] * w[k][c] + v.vertical[k] * wb[k][c];
        }
    }
    out
}

/// `phi = vol dx1^dx2^dx3 + sum_i dx_i ^ slot_i` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Form {
    pub domain: DomainSpec,
    pub vol: Vec<f64>,
    pub slots: Vec<[Form2; 3]>,
}

/// Coordinate labels: `x1..x3` then `y0..y3`.
const LABELS: [&str; 7] = ["x1", "x2", "x3", "y0", "y1", "y2", "y3"];
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

impl G2Form {
    /// All 35 coefficients at a node, keyed by increasing index triples.
    pub fn coefficients(&self, node: usize) -> Vec<([usize; 3], f64)> {
        let mut out = Vec::with_capacity(35);
        for a in 0..7 {
            for b in (a + 1)..7 {
                for c in (b + 1)..7 {
                    out.push(([a, b, c], 0.0));
                }
            }
        }
        let mut add = |mut idx: [usize; 3], v: f64| {
            let mut sign = 1.0;
            for i in 0..3 {
                for j in 0..2 - i {
                    if idx[j] > idx[j + 1] {
                        idx.swap(j, j + 1);
                        sign = -sign;
                    }
                }
            }
            let e = out.iter_mut().find(|(k, _)| *k == idx).expect("valid triple");
            e.1 += sign * v;
        };
        add([0, 1, 2], self.vol[node]);
        for (i, slot) in self.slots[node].iter().enumerate() {
            for (c, &(p, q)) in PAIRS.iter().enumerate() {
                add([i, 3 + p, 3 + q], slot[c]);
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = (0..self.vol.len())
            .map(|node| {
                let mut m = Map::new();
                for (idx, v) in self.coefficients(node) {
                    m.insert(idx.iter().map(|&i| LABELS[i]).collect::<Vec<_>>().join("^"), json!(v));
                }
                Value::Object(m)
            })
            .collect();
        json!({ "convention": CONVENTION, "domain": self.domain, "coefficients": nodes })
    }
}

fn check_33(state: &GraphState) -> Result<(), GeometryError> {
    if state.n() != 3 || state.m != 3 {
        return Err(GeometryError::DimensionMismatch { expected: "(3, 3)".into(), found: format!("({}, {})", state.n(), state.m) });
    }
    Ok(())
}

/// `phi = -X^* vol + dX` for a spacelike graph over a 3-dimensional box.
pub fn immersion_to_phi(state: &GraphState) -> Result<G2Form, GeometryError> {
    check_33(state)?;
    let st = Stencils::new(&state.domain);
    let wb = omega_bar_basis();
    let w = omega_basis();
    let nodes = state.domain.node_count();
    let mut vol = Vec::with_capacity(nodes);
    let mut slots = Vec::with_capacity(nodes);
    let mut jet = GraphJet::zeros(3, 3);
    for node in 0..nodes {
        st.jet_into(&state.u, 3, node, &mut jet.du, &mut jet.d2u);
        let g = nalgebra::Matrix3::from_fn(|i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - (0..3).map(|a| jet.du(i, a) * jet.du(j, a)).sum::<f64>()
        });
        let max_lambda = 1.0 - g.symmetric_eigenvalues().min();
        if !(max_lambda < 1.0 - crate::geometry::SPACELIKE_EPS) {
            return Err(GeometryError::SpacelikeViolation { max_eigenvalue: max_lambda });
        }
        vol.push(-g.determinant().sqrt());
        let mut s = [[0.0; 6]; 3];
        for (i, slot) in s.iter_mut().enumerate() {
            for c in 0..6 {
                slot[c] = w[i][c] + (0..3).map(|a| jet.du(i, a) * wb[a][c]).sum::<f64>();
            }
        }
        slots.push(s);
    }
    Ok(G2Form { domain: state.domain.clone(), vol, slots })
}

/// Largest coefficient of the discrete `d phi`, i.e. of
/// `D_j slot_i - D_i slot_j`, over nodes at least two cells from the
/// boundary. The volume term is closed on a 3-dimensional base.
pub fn check_closed(phi: &G2Form) -> f64 {
    let d = &phi.domain;
    let n = d.n();
    let strides = d.strides();
    let mut worst: f64 = 0.0;
    for node in 0..d.node_count() {
        let idx = d.multi_index(node);
        if (0..n).any(|k| idx[k] < 2 || idx[k] + 2 > d.resolution[k]) {
            continue;
        }
        let deriv = |slot: usize, axis: usize, c: usize| {
            let (p, q) = (node + strides[axis], node - strides[axis]);
            (phi.slots[p][slot][c] - phi.slots[q][slot][c]) / (2.0 * d.spacing(axis))
        };
        for i in 0..n {
            for j in (i + 1)..n {
                for c in 0..6 {
                    worst = worst.max((deriv(i, j, c) - deriv(j, i, c)).abs());
                }
            }
        }
    }
    worst
}

/// Torsion of the G2-structure of a graph: its mean curvature vector,
/// carried to H^2(T^4).
#[derive(Debug, Clone, PartialEq)]
pub struct Torsion {
    /// Evolved nodes the fields below refer to.
    pub nodes: Vec<usize>,
    /// Graph components `H^A`.
    pub components: Vec<[f64; 3]>,
    /// The torsion two-form.
    pub forms: Vec<Form2>,
    /// `||H||^2` as reported by the geometry frame.
    pub h_norm2: Vec<f64>,
}

impl Torsion {
    pub fn sup_norm2(&self) -> f64 {
        self.h_norm2.iter().cloned().fold(0.0, f64::max)
    }

    /// `-(1/2) int tau ^ tau`, which equals `||H||^2` up to rounding.
    pub fn form_norm2(&self, k: usize) -> f64 {
        -0.5 * wedge_pairing(&self.forms[k], &self.forms[k])
    }
}

pub fn torsion(state: &GraphState) -> Result<Torsion, GeometryError> {
    check_33(state)?;
    let sig = Signature { n: 3, m: 3 };
    let st = Stencils::new(&state.domain);
    let nodes = state.domain.evolved_nodes();
    let mut out = Torsion { nodes: nodes.clone(), components: Vec::new(), forms: Vec::new(), h_norm2: Vec::new() };
    for &node in &nodes {
        let jet = st.jet(&state.u, 3, node);
        let x = AmbientVector::new(state.domain.coords(node).to_vec(), state.value(node).to_vec());
        let f = geometry_frame(&jet, &x, sig)?;
        out.components.push([f.h_graph[0], f.h_graph[1], f.h_graph[2]]);
        out.forms.push(to_form(&f.h_vector));
        out.h_norm2.push(f.h_norm2);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;

    #[test]
    fn self_dual_pairings() {
        let (w, wb) = (omega_basis(), omega_bar_basis());
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 2.0 } else { 0.0 };
                assert_eq!(wedge_pairing(&w[i], &w[j]), d);
                assert_eq!(wedge_pairing(&wb[i], &wb[j]), -d);
                assert_eq!(wedge_pairing(&w[i], &wb[j]), 0.0);
            }
        }
    }

    fn box3(cells: usize) -> DomainSpec {
        DomainSpec::cube(3, 0.0, 1.0, cells, BoundaryKind::Dirichlet)
    }

    #[test]
    fn identity_gives_phi0() {
        let s = GraphState::zeros(box3(4), 3).unwrap();
        let phi = immersion_to_phi(&s).unwrap();
        let mut expected = vec![0.0; 35];
        let c = phi.coefficients(0);
        let find = |t: [usize; 3]| c.iter().position(|(k, _)| *k == t).unwrap();
        expected[find([0, 1, 2])] = -1.0;
        // dx1^(dy0^dy1 + dy2^dy3) and cyclic
        for (i, (p, q, r, s)) in [(3, 4, 5, 6), (3, 5, 6, 4), (3, 6, 4, 5)].into_iter().enumerate() {
            expected[find([i, p, q])] += 1.0;
            let (lo, hi, sign) = if r < s { (r, s, 1.0) } else { (s, r, -1.0) };
            expected[find([i, lo, hi])] += sign;
        }
        for node in 0..s.domain.node_count() {
            let got: Vec<f64> = phi.coefficients(node).into_iter().map(|p| p.1).collect();
            assert_eq!(got, expected);
        }
        assert_eq!(check_closed(&phi), 0.0);
        let json = phi.to_json();
        assert_eq!(json["coefficients"][0]["x1^x2^x3"], -1.0);
        assert_eq!(json["coefficients"][0].as_object().unwrap().len(), 35);
    }

    #[test]
    fn translation_invariance_and_positivity() {
        let d = box3(4);
        let a = GraphState::from_fn(d.clone(), 3, 0.0, |x, o| o.copy_from_slice(&[0.25 * x[0], 0.125 * x[1], 0.0])).unwrap();
        let b = GraphState::from_fn(d.clone(), 3, 0.0, |x, o| o.copy_from_slice(&[0.25 * x[0] + 3.0, 0.125 * x[1] - 1.0, 2.0]))
            .unwrap();
        assert_eq!(immersion_to_phi(&a).unwrap(), immersion_to_phi(&b).unwrap());
        assert_eq!(check_closed(&immersion_to_phi(&a).unwrap()), 0.0);
        let steep = GraphState::from_fn(d, 3, 0.0, |x, o| o.copy_from_slice(&[1.5 * x[0], 0.0, 0.0])).unwrap();
        assert!(matches!(immersion_to_phi(&steep), Err(GeometryError::SpacelikeViolation { .. })));
    }

    #[test]
    fn torsion_of_curved_graph() {
        let flat = GraphState::zeros(box3(6), 3).unwrap();
        assert_eq!(torsion(&flat).unwrap().sup_norm2(), 0.0);
        let curved = GraphState::from_fn(box3(8), 3, 0.0, |x, o| {
            o.copy_from_slice(&[0.2 * (x[0] * x[0] + x[1] * x[1]), 0.1 * x[2] * x[2], 0.0])
        })
        .unwrap();
        let t = torsion(&curved).unwrap();
        assert!(t.sup_norm2() > 0.0);
        for k in 0..t.nodes.len() {
            assert!((t.form_norm2(k) - t.h_norm2[k]).abs() < 1e-12 * (1.0 + t.h_norm2[k]));
        }
    }
}
