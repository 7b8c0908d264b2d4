//! Linearly implicit step: frozen-coefficient operators `L_a w = g^{ij}(Da) D_ij w`
//! inverted by a tridiagonal sweep in one dimension and by Jacobi
//! preconditioned BiCGSTAB otherwise.

use super::engine::Engine;
use crate::error::FlowError;
use crate::geometry::kernel;
use crate::geometry::small::{Mat3, ZERO3};
use crate::grid::GraphState;

const REL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 5000;

fn coefficients(e: &Engine, u: &[f64], nodes: usize) -> Vec<Mat3> {
    let (n, m) = (e.n, e.m);
    let mut du = vec![0.0; n * m];
    let mut d2u = vec![0.0; n * n * m];
    let mut out = vec![ZERO3; nodes];
    for &node in &e.evolved {
        e.stencils.jet_into(u, m, node, &mut du, &mut d2u);
        out[node] = kernel::metric(&du, n, m).g_inv;
    }
    out
}

/// `out = L w` at evolved nodes, zero elsewhere.
fn apply_l(e: &Engine, coef: &[Mat3], w: &[f64], out: &mut [f64]) {
    let (n, m) = (e.n, e.m);
    let mut du = vec![0.0; n * m];
    let mut d2u = vec![0.0; n * n * m];
    out.fill(0.0);
    for &node in &e.evolved {
        e.stencils.jet_into(w, m, node, &mut du, &mut d2u);
        let g = &coef[node];
        for a in 0..m {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += g[i][j] * d2u[(i * n + j) * m + a];
                }
            }
            out[node * m + a] = s;
        }
    }
}

/// `out = w - theta L w`, identity on pinned nodes.
fn apply_op(e: &Engine, coef: &[Mat3], theta: f64, w: &[f64], out: &mut [f64]) {
    apply_l(e, coef, w, out);
    for (o, x) in out.iter_mut().zip(w) {
        *o = x - theta * *o;
    }
}

fn positions(e: &Engine, state: &GraphState, node: usize) -> [usize; 3] {
    let _ = e;
    state.domain.multi_index(node)
}

fn diagonal(e: &Engine, state: &GraphState, coef: &[Mat3], theta: f64) -> Vec<f64> {
    let nodes = state.domain.node_count();
    let mut d = vec![1.0; nodes];
    for &node in &e.evolved {
        let pos = positions(e, state, node);
        let mut s = 0.0;
        for i in 0..e.n {
            let own: f64 = e.stencils.second_taps(i, pos[i]).filter(|&(q, _)| q == pos[i]).map(|(_, w)| w).sum();
            s += coef[node][i][i] * own;
        }
        d[node] = 1.0 - theta * s;
    }
    d
}

fn thomas(e: &Engine, state: &GraphState, coef: &[Mat3], theta: f64, rhs: &[f64]) -> Vec<f64> {
    let m = e.m;
    let len = state.domain.node_count();
    let (mut lo, mut di, mut up) = (vec![0.0; len], vec![1.0; len], vec![0.0; len]);
    for &p in &e.evolved {
        let g = coef[p][0][0];
        let mut d = 1.0;
        for (q, w) in e.stencils.second_taps(0, p) {
            let v = -theta * g * w;
            if q == p {
                d += v;
            } else if q + 1 == p {
                lo[p] += v;
            } else if q == p + 1 {
                up[p] += v;
            } else {
                unreachable!("evolved nodes use three-point second differences");
            }
        }
        di[p] = d;
    }
    let mut x = vec![0.0; len * m];
    let mut c = vec![0.0; len];
    let mut y = vec![0.0; len];
    for a in 0..m {
        c[0] = up[0] / di[0];
        y[0] = rhs[a] / di[0];
        for i in 1..len {
            let den = di[i] - lo[i] * c[i - 1];
            c[i] = up[i] / den;
            y[i] = (rhs[i * m + a] - lo[i] * y[i - 1]) / den;
        }
        x[(len - 1) * m + a] = y[len - 1];
        for i in (0..len - 1).rev() {
            x[i * m + a] = y[i] - c[i] * x[(i + 1) * m + a];
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[allow(clippy::too_many_arguments)]
fn bicgstab(
    e: &Engine,
    state: &GraphState,
    coef: &[Mat3],
    theta: f64,
    rhs: &[f64],
    guess: &[f64],
) -> Result<Vec<f64>, FlowError> {
    let m = e.m;
    let len = rhs.len();
    let diag = diagonal(e, state, coef, theta);
    let precond = |v: &[f64], out: &mut [f64]| {
        for (k, o) in out.iter_mut().enumerate() {
            *o = v[k] / diag[k / m];
        }
    };
    let bnorm = dot(rhs, rhs).sqrt().max(f64::MIN_POSITIVE);
    let mut x = guess.to_vec();
    let mut r = vec![0.0; len];
    apply_op(e, coef, theta, &x, &mut r);
    for k in 0..len {
        r[k] = rhs[k] - r[k];
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; len];
    let mut p = vec![0.0; len];
    let mut y = vec![0.0; len];
    let mut s = vec![0.0; len];
    let mut z = vec![0.0; len];
    let mut t = vec![0.0; len];
    let mut res = dot(&r, &r).sqrt();
    for _ in 0..MAX_ITER {
        if res <= REL_TOL * bnorm {
            return Ok(x);
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..len {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        precond(&p, &mut y);
        apply_op(e, coef, theta, &y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for k in 0..len {
            s[k] = r[k] - alpha * v[k];
        }
        if dot(&s, &s).sqrt() <= REL_TOL * bnorm {
            for k in 0..len {
                x[k] += alpha * y[k];
            }
            return Ok(x);
        }
        precond(&s, &mut z);
        apply_op(e, coef, theta, &z, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for k in 0..len {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        res = dot(&r, &r).sqrt();
    }
    if res <= REL_TOL * bnorm {
        return Ok(x);
    }
    Err(FlowError::LinearSolver { residual: res / bnorm, iterations: MAX_ITER })
}

fn solve(e: &Engine, state: &GraphState, coef: &[Mat3], theta: f64, rhs: &[f64], guess: &[f64]) -> Result<Vec<f64>, FlowError> {
    if e.n == 1 {
        Ok(thomas(e, state, coef, theta, rhs))
    } else {
        bicgstab(e, state, coef, theta, rhs, guess)
    }
}

/// Predictor `(I - dt L_{u}) w = u`, corrector
/// `(I - dt/2 L_a) u' = u + dt/2 L_a u` with `a = (u + w) / 2`.
pub(crate) fn crank_nicolson(e: &Engine, state: &GraphState, dt: f64) -> Result<Vec<f64>, FlowError> {
    let nodes = state.domain.node_count();
    let t1 = state.t + dt;
    let coef = coefficients(e, &state.u, nodes);
    let mut rhs = state.u.clone();
    e.pin(state, t1, &mut rhs)?;
    let pred = solve(e, state, &coef, dt, &rhs, &rhs)?;

    let mid: Vec<f64> = state.u.iter().zip(&pred).map(|(a, b)| 0.5 * (a + b)).collect();
    let coef = coefficients(e, &mid, nodes);
    let mut lu = vec![0.0; state.u.len()];
    apply_l(e, &coef, &state.u, &mut lu);
    let mut rhs: Vec<f64> = state.u.iter().zip(&lu).map(|(u, l)| u + 0.5 * dt * l).collect();
    e.pin(state, t1, &mut rhs)?;
    solve(e, state, &coef, 0.5 * dt, &rhs, &pred)
}
