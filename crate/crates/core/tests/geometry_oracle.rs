use proptest::prelude::*;
use spacelike_mcf::geometry::{causal_class, geometry_frame, minkowski_ip, AmbientVector, CausalClass, GraphJet, Signature};

// Ambient vectors as flat arrays: n spatial entries then m timelike ones.
struct Ambient {
    n: usize,
    m: usize,
}

impl Ambient {
    fn ip(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n + self.m).map(|k| if k < self.n { x[k] * y[k] } else { -x[k] * y[k] }).sum()
    }
}

// Gauss-Jordan with partial pivoting.
fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for v in &mut m[c] {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

struct Expected {
    v2: f64,
    h_norm2: f64,
    ii_norm2: f64,
    h_vector: Vec<f64>,
    x_perp: Vec<f64>,
}

fn oracle(jet: &GraphJet, x: &[f64]) -> Expected {
    let (n, m) = (jet.n, jet.m);
    let amb = Ambient { n, m };
    let dim = n + m;
    let tangent: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..dim).map(|k| if k < n { f64::from(k == i) } else { jet.du(i, k - n) }).collect())
        .collect();
    let g: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| amb.ip(&tangent[i], &tangent[j])).collect()).collect();
    let gi = invert(&g);
    let perp = |v: &[f64]| -> Vec<f64> {
        let c: Vec<f64> = (0..n).map(|l| amb.ip(v, &tangent[l])).collect();
        let mut out = v.to_vec();
        for k in 0..n {
            for l in 0..n {
                for (o, t) in out.iter_mut().zip(&tangent[k]) {
                    *o -= gi[k][l] * c[l] * t;
                }
            }
        }
        out
    };
    let e = |a: usize| -> Vec<f64> { (0..dim).map(|k| f64::from(k == n + a)).collect() };
    let v2: f64 = (0..m).map(|a| -amb.ip(&perp(&e(a)), &perp(&e(a)))).sum();

    let ii: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let raw: Vec<f64> = (0..dim).map(|k| if k < n { 0.0 } else { jet.d2u(i, j, k - n) }).collect();
                    perp(&raw)
                })
                .collect()
        })
        .collect();
    let mut h = vec![0.0; dim];
    for i in 0..n {
        for j in 0..n {
            for k in 0..dim {
                h[k] += gi[i][j] * ii[i][j][k];
            }
        }
    }
    let mut ii_norm2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    ii_norm2 -= gi[i][k] * gi[j][l] * amb.ip(&ii[i][j], &ii[k][l]);
                }
            }
        }
    }
    Expected { v2, h_norm2: -amb.ip(&h, &h), ii_norm2, h_vector: h, x_perp: perp(x) }
}

fn flat(v: &AmbientVector) -> Vec<f64> {
    v.spatial.iter().chain(&v.vertical).copied().collect()
}

// Random jet with operator norm of Du at most `slope` < 1.
fn jet_strategy() -> impl Strategy<Value = (GraphJet, Vec<f64>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-1.0f64..1.0, n * m),
            prop::collection::vec(-2.0f64..2.0, n * n * m),
            0.0f64..0.95,
            prop::collection::vec(-3.0f64..3.0, n + m),
        )
            .prop_map(move |(du, d2, slope, x)| {
                let fro = du.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                let mut jet = GraphJet::zeros(n, m);
                for i in 0..n {
                    for a in 0..m {
                        jet.set_du(i, a, du[i * m + a] * slope / fro);
                    }
                }
                for i in 0..n {
                    for j in i..n {
                        for a in 0..m {
                            jet.set_d2u(i, j, a, d2[(i * n + j) * m + a]);
                        }
                    }
                }
                (jet, x)
            })
    })
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn frame_matches_ambient_projection((jet, x) in jet_strategy()) {
        let sig = Signature::new(jet.n, jet.m).unwrap();
        let pos = AmbientVector::new(x[..jet.n].to_vec(), x[jet.n..].to_vec());
        let f = geometry_frame(&jet, &pos, sig).unwrap();
        let want = oracle(&jet, &x);
        prop_assert!(close(f.v2, want.v2, want.v2), "v2 {} vs {}", f.v2, want.v2);
        prop_assert!(close(f.v2_spectral, want.v2, want.v2));
        prop_assert!(close(f.h_norm2, want.h_norm2, want.h_norm2), "H {} vs {}", f.h_norm2, want.h_norm2);
        prop_assert!(close(f.ii_norm2, want.ii_norm2, want.ii_norm2), "II {} vs {}", f.ii_norm2, want.ii_norm2);
        for (a, b) in flat(&f.h_vector).iter().zip(&want.h_vector) {
            prop_assert!(close(*a, *b, want.h_norm2.sqrt()));
        }
        for (a, b) in flat(&f.x_perp).iter().zip(&want.x_perp) {
            prop_assert!(close(*a, *b, 10.0));
        }
    }

    #[test]
    fn frame_inequalities((jet, x) in jet_strategy()) {
        let sig = Signature::new(jet.n, jet.m).unwrap();
        let pos = AmbientVector::new(x[..jet.n].to_vec(), x[jet.n..].to_vec());
        let f = geometry_frame(&jet, &pos, sig).unwrap();
        let m = jet.m as f64;
        prop_assert!(f.v2 >= m - 1e-12);
        prop_assert!(f.h_norm2 >= -1e-10);
        // |H|^2 <= n |II|^2
        prop_assert!(f.h_norm2 <= jet.n as f64 * f.ii_norm2 + 1e-8 * (1.0 + f.ii_norm2));
        prop_assert!(f.x_perp_norm2 >= -1e-10);
        // the normal vectors are timelike or zero
        if !f.h_vector.is_zero() && f.h_norm2 > 1e-8 {
            prop_assert_eq!(causal_class(&f.h_vector).unwrap(), CausalClass::Timelike);
        }
    }

    #[test]
    fn pairing_symmetric_and_bilinear(
        x in prop::collection::vec(-5.0f64..5.0, 5),
        y in prop::collection::vec(-5.0f64..5.0, 5),
        s in -3.0f64..3.0,
    ) {
        let sig = Signature::new(2, 3).unwrap();
        let a = AmbientVector::new(x[..2].to_vec(), x[2..].to_vec());
        let b = AmbientVector::new(y[..2].to_vec(), y[2..].to_vec());
        let ab = minkowski_ip(&a, &b, sig).unwrap();
        prop_assert_eq!(ab, minkowski_ip(&b, &a, sig).unwrap());
        let sa = minkowski_ip(&a.scale(s), &b, sig).unwrap();
        prop_assert!((sa - s * ab).abs() <= 1e-12 * (1.0 + (s * ab).abs()));
        let sum = minkowski_ip(&a.add(&b), &b, sig).unwrap();
        prop_assert!((sum - ab - minkowski_ip(&b, &b, sig).unwrap()).abs() <= 1e-11 * (1.0 + sum.abs()));
    }
}

#[test]
fn lightlike_gradient_is_refused() {
    let sig = Signature::new(2, 2).unwrap();
    let mut jet = GraphJet::zeros(2, 2);
    jet.set_du(0, 0, 0.6);
    jet.set_du(0, 1, 0.8);
    assert!(geometry_frame(&jet, &AmbientVector::zeros(sig), sig).is_err());
}
