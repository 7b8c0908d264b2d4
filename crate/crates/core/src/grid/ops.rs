use super::{BoundaryKind, DomainKind, DomainSpec, GraphState, Stencils, MAX_DIM};
use crate::error::GridError;
use crate::geometry::kernel;

/// A node array with one ghost layer on every face.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedArray {
    /// Padded nodes per axis (interior shape + 2).
    pub shape: Vec<usize>,
    pub m: usize,
    pub data: Vec<f64>,
}

impl PaddedArray {
    /// Values at a grid index, where `-1` and `len` address the ghosts.
    pub fn get(&self, idx: &[isize]) -> &[f64] {
        let mut flat = 0usize;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[k] + (i + 1) as usize;
        }
        &self.data[flat * self.m..(flat + 1) * self.m]
    }
}

/// Pads the state with mirror ghosts: the ghost beyond a face copies the
/// first interior layer, so the centered normal difference vanishes.
pub fn neumann_ghost_fill(state: &GraphState) -> Result<PaddedArray, GridError> {
    let d = &state.domain;
    if d.boundary != BoundaryKind::Neumann {
        return Err(GridError::WrongBoundary { expected: "neumann", found: d.boundary.name().into() });
    }
    let n = d.n();
    let m = state.m;
    let shape: Vec<usize> = d.shape().iter().map(|s| s + 2).collect();
    let total: usize = shape.iter().product();
    let mut data = vec![0.0; total * m];
    for flat in 0..total {
        let mut rest = flat;
        let mut src = [0usize; MAX_DIM];
        for k in (0..n).rev() {
            let p = (rest % shape[k]) as isize - 1;
            rest /= shape[k];
            let last = d.resolution[k] as isize;
            src[k] = if p < 0 {
                1
            } else if p > last {
                (last - 1) as usize
            } else {
                p as usize
            };
        }
        let node = d.node(&src[..n]);
        data[flat * m..(flat + 1) * m].copy_from_slice(state.value(node));
    }
    Ok(PaddedArray { shape, m, data })
}

/// The radial reflection `R + L - |R + L - r|`, clipped at 0: identity up to
/// `R + L`, folding back to 0 at `2R + 2L`.
pub fn reflected_profile(r: f64, radius: f64, lambda: f64) -> f64 {
    let turn = radius + lambda;
    (turn - (turn - r).abs()).max(0.0)
}

/// Extends data given on a ball to a compactly supported profile on a
/// larger box by reflecting across the sphere of radius `R + L`, then
/// smooths the two seams.
///
/// The input must cover `B_{R+L}`; its value at the origin is subtracted.
/// The output is a Neumann truncation centered at the origin with
/// half-width `2R + 3L + 1`, equal to zero beyond `2R + 2L + L/4`.
pub fn annulus_reflection_extend(u0: &GraphState, radius: f64, lambda: f64) -> Result<GraphState, GridError> {
    if !(radius > 0.0 && lambda > 0.0) {
        return Err(GridError::InvalidDomain(format!("radius {radius} and margin {lambda} must be positive")));
    }
    let n = u0.n();
    let m = u0.m;
    let turn = radius + lambda;
    for k in 0..n {
        let [lo, hi] = u0.domain.bounds[k];
        if lo > -turn || hi < turn {
            return Err(GridError::InvalidDomain(format!("input does not cover the ball of radius {turn}")));
        }
    }
    let half_width = 2.0 * radius + 3.0 * lambda + 1.0;
    let mut bounds = Vec::with_capacity(n);
    let mut resolution = Vec::with_capacity(n);
    for k in 0..n {
        let h = u0.domain.spacing(k);
        let cells = (half_width / h).ceil() as usize;
        bounds.push([-(cells as f64) * h, cells as f64 * h]);
        resolution.push(2 * cells);
    }
    let domain = DomainSpec { kind: DomainKind::EntireTruncation, bounds, resolution, boundary: BoundaryKind::Neumann };
    domain.validate()?;

    let mut center = vec![0.0; m];
    u0.sample_linear(&vec![0.0; n], &mut center)?;
    let mut out = GraphState::zeros(domain.clone(), m)?;
    out.t = u0.t;
    let mut buf = vec![0.0; m];
    let mut p = vec![0.0; n];
    for node in 0..domain.node_count() {
        let x = domain.coords(node);
        let r = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho = reflected_profile(r, radius, lambda);
        if r == 0.0 || rho == 0.0 {
            continue;
        }
        for k in 0..n {
            p[k] = (x[k] * rho / r).clamp(u0.domain.bounds[k][0], u0.domain.bounds[k][1]);
        }
        u0.sample_linear(&p, &mut buf)?;
        for a in 0..m {
            out.u[node * m + a] = buf[a] - center[a];
        }
    }

    let band: Vec<usize> = (0..domain.node_count())
        .filter(|&node| {
            let x = domain.coords(node);
            let r = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            (r - turn).abs() <= 0.25 * lambda || (r - 2.0 * turn).abs() <= 0.25 * lambda
        })
        .collect();
    let passes = (lambda / (8.0 * domain.h_max())).powi(2).ceil() as usize;
    smooth_band(&mut out, &band, passes);

    let st = Stencils::new(&domain);
    let mut du = vec![0.0; n * m];
    let mut d2u = vec![0.0; n * n * m];
    for node in 0..domain.node_count() {
        st.jet_into(&out.u, m, node, &mut du, &mut d2u);
        let met = kernel::metric(&du, n, m);
        if !met.is_spacelike() {
            return Err(GridError::Spacelike { node, max_eigenvalue: met.max_lambda() });
        }
    }
    Ok(out)
}

/// Repeated separable `[1, 4, 6, 4, 1] / 16` averaging restricted to `band`.
fn smooth_band(state: &mut GraphState, band: &[usize], passes: usize) {
    const W: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let d = state.domain.clone();
    let m = state.m;
    let strides = d.strides();
    let mut next = state.u.clone();
    for _ in 0..passes {
        for k in 0..d.n() {
            let last = d.resolution[k] as isize;
            for &node in band {
                let pos = d.multi_index(node)[k] as isize;
                for a in 0..m {
                    let mut s = 0.0;
                    for (o, w) in (-2isize..=2).zip(W) {
                        let q = (pos + o).clamp(0, last);
                        let nb = (node as isize + (q - pos) * strides[k] as isize) as usize;
                        s += w * state.u[nb * m + a];
                    }
                    next[node * m + a] = s;
                }
            }
            for &node in band {
                state.u[node * m..(node + 1) * m].copy_from_slice(&next[node * m..(node + 1) * m]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;

    #[test]
    fn ghosts_mirror_the_first_interior_layer() {
        let d = DomainSpec::interval(0.0, 1.0, 8, BoundaryKind::Neumann);
        let s = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.1 * (std::f64::consts::PI * x[0]).cos()).unwrap();
        let p = neumann_ghost_fill(&s).unwrap();
        assert_eq!(p.get(&[-1]), p.get(&[1]));
        assert_eq!(p.get(&[9]), p.get(&[7]));
        assert_eq!(p.get(&[4]), s.value(4));
        // cosine is even about both faces, so the mirror is its true extension
        let h = 1.0 / 8.0;
        assert!((p.get(&[-1])[0] - 0.1 * (std::f64::consts::PI * -h).cos()).abs() < 1e-16);

        let d2 = DomainSpec::cube(2, 0.0, 1.0, 4, BoundaryKind::Neumann);
        let s2 = GraphState::from_fn(d2, 1, 0.0, |x, o| o[0] = x[0] + 10.0 * x[1]).unwrap();
        let p2 = neumann_ghost_fill(&s2).unwrap();
        assert_eq!(p2.get(&[-1, -1]), p2.get(&[1, 1]));
        assert_eq!(p2.get(&[5, 2]), p2.get(&[3, 2]));
    }

    #[test]
    fn ghost_fill_rejects_dirichlet() {
        let s = GraphState::zeros(DomainSpec::interval(0.0, 1.0, 4, BoundaryKind::Dirichlet), 1).unwrap();
        assert!(matches!(neumann_ghost_fill(&s), Err(GridError::WrongBoundary { .. })));
    }

    #[test]
    fn reflection_turns_at_r_plus_lambda() {
        let (r, l) = (5.0, 2.0);
        assert_eq!(reflected_profile(3.0, r, l), 3.0);
        assert_eq!(reflected_profile(7.0, r, l), 7.0);
        assert_eq!(reflected_profile(9.0, r, l), 5.0);
        assert_eq!(reflected_profile(14.0, r, l), 0.0);
        assert_eq!(reflected_profile(30.0, r, l), 0.0);
    }

    #[test]
    fn zero_data_extends_to_zero() {
        let d = DomainSpec::interval(-4.0, 4.0, 32, BoundaryKind::Neumann);
        let s = GraphState::zeros(d, 2).unwrap();
        let e = annulus_reflection_extend(&s, 2.0, 1.0).unwrap();
        assert!(e.u.iter().all(|&v| v == 0.0));
        assert_eq!(e.domain.kind, DomainKind::EntireTruncation);
        assert!(e.domain.bounds[0][1] >= 2.0 * 2.0 + 3.0 + 1.0);
    }

    #[test]
    fn linear_data_reflects_and_vanishes_outside() {
        let (radius, lambda) = (4.0, 2.0);
        let d = DomainSpec::interval(-8.0, 8.0, 128, BoundaryKind::Neumann);
        let s = GraphState::from_fn(d, 1, 0.0, |x, o| o[0] = 0.5 * x[0]).unwrap();
        let e = annulus_reflection_extend(&s, radius, lambda).unwrap();
        let mut v = [0.0];
        // untouched by either seam band
        e.sample_linear(&[2.0], &mut v).unwrap();
        assert_eq!(v[0], 1.0);
        e.sample_linear(&[-9.0], &mut v).unwrap();
        assert_eq!(v[0], -1.5);
        for node in 0..e.domain.node_count() {
            let x = e.domain.coords(node)[0].abs();
            if x >= 2.0 * radius + 3.0 * lambda {
                assert_eq!(e.u[node], 0.0);
            }
        }
        assert!(e.sup_norm() <= s.sup_norm() + 1e-12);
        // the smoothed turning point stays below the reflected peak u0(R + L)
        e.sample_linear(&[radius + lambda], &mut v).unwrap();
        assert!(v[0] < 0.5 * (radius + lambda) && v[0] > 0.5 * radius);
    }
}
