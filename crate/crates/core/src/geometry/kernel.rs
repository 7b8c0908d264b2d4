//! Hot-path pointwise geometry for grids with n <= 3.
//!
//! Slices follow the [`GraphJet`](super::GraphJet) layout: `du[i * m + a]`
//! and `d2u[(i * n + j) * m + a]`. The contractions with the normal Gram
//! matrix are expanded so nothing of size m x m is ever formed.

use super::small::{inverse, sym_eigenvalues, Mat3, ZERO3};
use super::SPACELIKE_EPS;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Metric {
    pub n: usize,
    pub g_inv: Mat3,
    /// Smallest eigenvalue of g, equal to `1 - max eig(Du Du^T)`.
    pub min_eig: f64,
}

impl Metric {
    pub fn max_lambda(&self) -> f64 {
        1.0 - self.min_eig
    }

    /// NaN-safe: a non-finite metric is never spacelike.
    pub fn is_spacelike(&self) -> bool {
        self.min_eig > SPACELIKE_EPS
    }

    /// Largest eigenvalue of g^{-1}.
    pub fn g_inv_max(&self) -> f64 {
        1.0 / self.min_eig
    }

    pub fn trace_inv(&self) -> f64 {
        (0..self.n).map(|i| self.g_inv[i][i]).sum()
    }
}

pub(crate) fn metric(du: &[f64], n: usize, m: usize) -> Metric {
    let mut g = ZERO3;
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..m).map(|a| du[i * m + a] * du[j * m + a]).sum();
            let v = if i == j { 1.0 - s } else { -s };
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    let min_eig = sym_eigenvalues(&g, n)[0];
    Metric { n, g_inv: inverse(&g, n), min_eig }
}

/// `out[a] = g^{ij} D_ij u^a`, the graph velocity of the flow.
pub(crate) fn velocity(metric: &Metric, d2u: &[f64], n: usize, m: usize, out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate().take(m) {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += metric.g_inv[i][j] * d2u[(i * n + j) * m + a];
            }
        }
        *o = s;
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PointScalars {
    pub max_lambda: f64,
    pub spacelike: bool,
    pub g_inv_max: f64,
    pub v2: f64,
    pub h_norm2: f64,
    pub ii_norm2: f64,
}

pub(crate) fn point_scalars(du: &[f64], d2u: &[f64], n: usize, m: usize) -> PointScalars {
    let met = metric(du, n, m);
    let gi = &met.g_inv;
    let v2 = m as f64 - n as f64 + met.trace_inv();

    // |H|^2_graph + p^T g^{-1} p with p_i = D_i u . H
    let mut h_norm2 = 0.0;
    let mut p = [0.0; 3];
    for a in 0..m {
        let mut h = 0.0;
        for i in 0..n {
            for j in 0..n {
                h += gi[i][j] * d2u[(i * n + j) * m + a];
            }
        }
        h_norm2 += h * h;
        for (i, pi) in p.iter_mut().enumerate().take(n) {
            *pi += du[i * m + a] * h;
        }
    }
    for i in 0..n {
        for j in 0..n {
            h_norm2 += p[i] * gi[i][j] * p[j];
        }
    }

    // sum_A tr(G Q^A G Q^A) + sum_pq g^{pq} tr(G M_p G M_q),
    // M_p = sum_A Q^A D_p u^A
    let mut ii_norm2 = 0.0;
    let mut mp = [ZERO3; 3];
    for a in 0..m {
        let mut q = ZERO3;
        for i in 0..n {
            for j in 0..n {
                q[i][j] = d2u[(i * n + j) * m + a];
            }
        }
        let gq = matmul(gi, &q, n);
        ii_norm2 += trace_prod(&gq, &gq, n);
        for (pidx, mpp) in mp.iter_mut().enumerate().take(n) {
            let d = du[pidx * m + a];
            for i in 0..n {
                for j in 0..n {
                    mpp[i][j] += q[i][j] * d;
                }
            }
        }
    }
    let mut k = [ZERO3; 3];
    for pidx in 0..n {
        k[pidx] = matmul(gi, &mp[pidx], n);
    }
    for pidx in 0..n {
        for qidx in 0..n {
            ii_norm2 += gi[pidx][qidx] * trace_prod(&k[pidx], &k[qidx], n);
        }
    }

    PointScalars {
        max_lambda: met.max_lambda(),
        spacelike: met.is_spacelike(),
        g_inv_max: met.g_inv_max(),
        v2,
        h_norm2,
        ii_norm2,
    }
}

fn matmul(a: &Mat3, b: &Mat3, n: usize) -> Mat3 {
    let mut c = ZERO3;
    for i in 0..n {
        for j in 0..n {
            c[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// tr(A B)
fn trace_prod(a: &Mat3, b: &Mat3, n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i][j] * b[j][i];
        }
    }
    s
}
