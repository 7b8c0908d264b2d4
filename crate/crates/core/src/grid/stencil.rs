use super::{BoundaryKind, DomainSpec, GraphState, MAX_DIM};
use crate::geometry::GraphJet;

#[derive(Debug, Clone, Copy, Default)]
struct Taps {
    len: usize,
    idx: [usize; 4],
    w: [f64; 4],
}

impl Taps {
    fn from(pairs: &[(usize, f64)]) -> Self {
        let mut t = Taps { len: pairs.len(), ..Default::default() };
        for (k, &(i, w)) in pairs.iter().enumerate() {
            t.idx[k] = i;
            t.w[k] = w;
        }
        t
    }
}

/// Per-axis finite-difference weights for every node position.
///
/// Interior nodes use second-order central differences. Neumann faces
/// mirror the first interior layer across the face; pinned faces use
/// second-order one-sided stencils. Mixed partials are tensor products
/// of the first-derivative weights, which is the four-point cross in the
/// interior.
#[derive(Debug, Clone)]
pub struct Stencils {
    n: usize,
    strides: [usize; MAX_DIM],
    first: Vec<Vec<Taps>>,
    second: Vec<Vec<Taps>>,
}

impl Stencils {
    pub fn new(domain: &DomainSpec) -> Self {
        let n = domain.n();
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for k in 0..n {
            let last = domain.resolution[k];
            let h = domain.spacing(k);
            let (c1, c2) = (0.5 / h, 1.0 / (h * h));
            let mut f = Vec::with_capacity(last + 1);
            let mut s = Vec::with_capacity(last + 1);
            for p in 0..=last {
                let (ft, st) = if p > 0 && p < last {
                    (
                        Taps::from(&[(p - 1, -c1), (p + 1, c1)]),
                        Taps::from(&[(p - 1, c2), (p, -2.0 * c2), (p + 1, c2)]),
                    )
                } else if domain.boundary == BoundaryKind::Neumann {
                    let q = if p == 0 { 1 } else { last - 1 };
                    (Taps::from(&[(q, -c1), (q, c1)]), Taps::from(&[(q, c2), (p, -2.0 * c2), (q, c2)]))
                } else {
                    // one-sided, pointing into the domain
                    let (dir, sgn) = if p == 0 { (1isize, 1.0) } else { (-1isize, -1.0) };
                    let at = |o: isize| (p as isize + dir * o) as usize;
                    (
                        Taps::from(&[(at(0), -3.0 * sgn * c1), (at(1), 4.0 * sgn * c1), (at(2), -sgn * c1)]),
                        Taps::from(&[(at(0), 2.0 * c2), (at(1), -5.0 * c2), (at(2), 4.0 * c2), (at(3), -c2)]),
                    )
                };
                f.push(ft);
                s.push(st);
            }
            first.push(f);
            second.push(s);
        }
        Self { n, strides: domain.strides(), first, second }
    }

    /// Writes the derivative jet of `u` (with `m` components) at `node`
    /// into `du` and `d2u` in [`GraphJet`] layout.
    pub fn jet_into(&self, u: &[f64], m: usize, node: usize, du: &mut [f64], d2u: &mut [f64]) {
        let n = self.n;
        let mut pos = [0usize; MAX_DIM];
        let mut rest = node;
        for k in 0..n {
            pos[k] = rest / self.strides[k];
            rest %= self.strides[k];
        }
        let shift = |k: usize, to: usize| -> isize { (to as isize - pos[k] as isize) * self.strides[k] as isize };

        for i in 0..n {
            let ft = &self.first[i][pos[i]];
            let st = &self.second[i][pos[i]];
            for a in 0..m {
                let mut d1 = 0.0;
                for p in 0..ft.len {
                    d1 += ft.w[p] * u[(node as isize + shift(i, ft.idx[p])) as usize * m + a];
                }
                du[i * m + a] = d1;
                let mut d2 = 0.0;
                for p in 0..st.len {
                    d2 += st.w[p] * u[(node as isize + shift(i, st.idx[p])) as usize * m + a];
                }
                d2u[(i * n + i) * m + a] = d2;
            }
            for j in (i + 1)..n {
                let gt = &self.first[j][pos[j]];
                for a in 0..m {
                    let mut d = 0.0;
                    for p in 0..ft.len {
                        let si = shift(i, ft.idx[p]);
                        let mut inner = 0.0;
                        for q in 0..gt.len {
                            inner += gt.w[q] * u[(node as isize + si + shift(j, gt.idx[q])) as usize * m + a];
                        }
                        d += ft.w[p] * inner;
                    }
                    d2u[(i * n + j) * m + a] = d;
                    d2u[(j * n + i) * m + a] = d;
                }
            }
        }
    }

    /// Second-derivative taps `(axis position, weight)` along `axis` at
    /// axis position `pos`.
    pub(crate) fn second_taps(&self, axis: usize, pos: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let t = &self.second[axis][pos];
        (0..t.len).map(move |k| (t.idx[k], t.w[k]))
    }

    pub fn jet(&self, u: &[f64], m: usize, node: usize) -> GraphJet {
        let mut jet = GraphJet::zeros(self.n, m);
        self.jet_into(u, m, node, &mut jet.du, &mut jet.d2u);
        jet
    }
}

/// First and second derivatives of the state at `node`.
pub fn derivatives(state: &GraphState, node: usize) -> GraphJet {
    Stencils::new(&state.domain).jet(&state.u, state.m, node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::log_cosh;

    #[test]
    fn constants_and_affine_maps_are_exact() {
        let d = DomainSpec::cube(2, 0.0, 1.0, 8, BoundaryKind::Dirichlet);
        let c = GraphState::from_fn(d.clone(), 2, 0.0, |_, o| o.copy_from_slice(&[0.3, -1.7])).unwrap();
        let aff = GraphState::from_fn(d.clone(), 1, 0.0, |x, o| o[0] = 0.5 * x[0] - 0.25 * x[1] + 1.0).unwrap();
        for node in 0..d.node_count() {
            let j = derivatives(&c, node);
            assert!(j.du.iter().chain(&j.d2u).all(|&v| v.abs() < 1e-12));
            let j = derivatives(&aff, node);
            assert_eq!(j.du, vec![0.5, -0.25]);
            assert!(j.d2u.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn neumann_faces_have_zero_normal_derivative() {
        let d = DomainSpec::cube(2, 0.0, 1.0, 10, BoundaryKind::Neumann);
        let s = GraphState::from_fn(d.clone(), 1, 0.0, |x, o| o[0] = (x[0] * 3.0).sin() + x[1] * x[1] * x[0]).unwrap();
        for node in d.boundary_nodes() {
            let idx = d.multi_index(node);
            let j = derivatives(&s, node);
            for k in 0..2 {
                if idx[k] == 0 || idx[k] == 10 {
                    assert_eq!(j.du(k, 0), 0.0);
                }
            }
        }
    }

    fn grim_errors(h: f64) -> f64 {
        let cells = (2.0 / h).round() as usize;
        let d = DomainSpec::interval(-1.0, 1.0, cells, BoundaryKind::Dirichlet);
        let s = GraphState::from_fn(d.clone(), 1, 0.0, |x, o| o[0] = log_cosh(x[0])).unwrap();
        let mut err: f64 = 0.0;
        for node in 0..d.node_count() {
            let x = d.coords(node)[0];
            let j = derivatives(&s, node);
            let th = x.tanh();
            err = err.max((j.du(0, 0) - th).abs()).max((j.d2u(0, 0, 0) - (1.0 - th * th)).abs());
        }
        err
    }

    #[test]
    fn stencils_are_second_order_including_boundary() {
        let e: Vec<f64> = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0].iter().map(|&h| grim_errors(h)).collect();
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&order), "order {order} from {e:?}");
        }
    }

    #[test]
    fn mixed_partial_of_product() {
        let d = DomainSpec::cube(3, -1.0, 1.0, 8, BoundaryKind::Dirichlet);
        let s = GraphState::from_fn(d.clone(), 1, 0.0, |x, o| o[0] = x[0] * x[1] + 0.5 * x[1] * x[2] * x[2]).unwrap();
        for node in 0..d.node_count() {
            let x = d.coords(node);
            let j = derivatives(&s, node);
            assert!((j.d2u(0, 1, 0) - 1.0).abs() < 1e-12);
            assert!((j.d2u(1, 2, 0) - x[2]).abs() < 1e-12);
            assert!((j.d2u(2, 2, 0) - x[1]).abs() < 1e-12);
            assert!(j.d2u(0, 2, 0).abs() < 1e-12);
        }
    }
}
