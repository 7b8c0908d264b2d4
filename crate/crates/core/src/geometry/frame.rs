use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{AmbientVector, Signature, SPACELIKE_EPS};
use crate::error::GeometryError;

/// First and second derivatives of a graph map `u: R^n -> R^m` at a point.
///
/// Layout: `du[i * m + a] = D_i u^a`, `d2u[(i * n + j) * m + a] = D_ij u^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphJet {
    pub n: usize,
    pub m: usize,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
}

impl GraphJet {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, du: vec![0.0; n * m], d2u: vec![0.0; n * n * m] }
    }

    pub fn du(&self, i: usize, a: usize) -> f64 {
        self.du[i * self.m + a]
    }

    pub fn d2u(&self, i: usize, j: usize, a: usize) -> f64 {
        self.d2u[(i * self.n + j) * self.m + a]
    }

    pub fn set_du(&mut self, i: usize, a: usize, v: f64) {
        self.du[i * self.m + a] = v;
    }

    /// Sets both `D_ij` and `D_ji`.
    pub fn set_d2u(&mut self, i: usize, j: usize, a: usize, v: f64) {
        let (n, m) = (self.n, self.m);
        self.d2u[(i * n + j) * m + a] = v;
        self.d2u[(j * n + i) * m + a] = v;
    }

    fn du_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m, |i, a| self.du(i, a))
    }

    fn hessian(&self, a: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.d2u(i, j, a))
    }
}

/// Pointwise geometric package of a spacelike graph.
#[derive(Debug, Clone)]
pub struct GeometryFrame {
    /// Induced metric `g_ij = delta_ij - D_i u . D_j u`.
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Normal Gram matrix `<e_A^perp, e_B^perp>`.
    pub g_hat: DMatrix<f64>,
    /// Eigenvalues of `Du Du^T`, ascending.
    pub lambda: Vec<f64>,
    /// `m + D_i u_A g^{ij} D_j u^A`.
    pub v2: f64,
    /// `m - n + sum_i 1 / (1 - lambda_i)`.
    pub v2_spectral: f64,
    /// Graph components `H^A = g^{ij} D_ij u^A`.
    pub h_graph: Vec<f64>,
    pub h_norm2: f64,
    pub ii_norm2: f64,
    /// The ambient mean curvature vector `H^A e_A^perp`.
    pub h_vector: AmbientVector,
    pub x_perp: AmbientVector,
    pub x_perp_norm2: f64,
}

impl GeometryFrame {
    pub fn max_lambda(&self) -> f64 {
        self.lambda.last().copied().unwrap_or(0.0)
    }
}

/// Evaluates the induced metric, normal Gram matrix, gradient function,
/// mean curvature and second fundamental form norms, and the normal part
/// of the position vector `x`, from the graph jet at that point.
pub fn geometry_frame(jet: &GraphJet, x: &AmbientVector, sig: Signature) -> Result<GeometryFrame, GeometryError> {
    let (n, m) = (sig.n, sig.m);
    if jet.n != n || jet.m != m || jet.du.len() != n * m || jet.d2u.len() != n * n * m {
        return Err(GeometryError::DimensionMismatch {
            expected: format!("jet ({n}, {m})"),
            found: format!("jet ({}, {})", jet.n, jet.m),
        });
    }
    if x.spatial.len() != n || x.vertical.len() != m {
        return Err(GeometryError::DimensionMismatch {
            expected: format!("({n}, {m})"),
            found: format!("({}, {})", x.spatial.len(), x.vertical.len()),
        });
    }

    let du = jet.du_matrix();
    let s = &du * du.transpose();
    let mut lambda: Vec<f64> = SymmetricEigen::new(s.clone()).eigenvalues.iter().copied().collect();
    lambda.sort_by(|a, b| a.total_cmp(b));
    let max_lambda = lambda.last().copied().unwrap_or(0.0);
    if !(max_lambda < 1.0 - SPACELIKE_EPS) {
        return Err(GeometryError::SpacelikeViolation { max_eigenvalue: max_lambda });
    }

    let g = DMatrix::<f64>::identity(n, n) - &s;
    let g_inv = g
        .clone()
        .cholesky()
        .ok_or(GeometryError::SpacelikeViolation { max_eigenvalue: max_lambda })?
        .inverse();

    let du_t_ginv_du = du.transpose() * &g_inv * &du;
    let g_hat = -DMatrix::<f64>::identity(m, m) - &du_t_ginv_du;

    let v2 = m as f64 + du_t_ginv_du.trace();
    let v2_spectral = m as f64 - n as f64 + lambda.iter().map(|l| 1.0 / (1.0 - l)).sum::<f64>();

    let hess: Vec<DMatrix<f64>> = (0..m).map(|a| jet.hessian(a)).collect();
    let h_graph: Vec<f64> = hess.iter().map(|q| g_inv.component_mul(q).sum()).collect();
    let h = DVector::from_column_slice(&h_graph);
    let h_norm2 = -(h.transpose() * &g_hat * &h)[(0, 0)];

    let gq: Vec<DMatrix<f64>> = hess.iter().map(|q| &g_inv * q).collect();
    let mut ii_norm2 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let tr = (&gq[a] * &gq[b]).trace();
            ii_norm2 -= g_hat[(a, b)] * tr;
        }
    }

    // H^A e_A^perp = H^A e_A + c_j X_j,  c_j = g^{ij} D_i u . H
    let p = &du * &h;
    let c = &g_inv * &p;
    let h_vector = AmbientVector::new(
        c.iter().copied().collect(),
        (0..m).map(|b| h_graph[b] + (0..n).map(|j| c[j] * du[(j, b)]).sum::<f64>()).collect(),
    );

    // X^perp = X - g^{ij} <X, X_i> X_j,  <X, X_i> = x_i - u . D_i u
    let xu = DVector::from_column_slice(&x.vertical);
    let x_dot_xi = DVector::from_fn(n, |i, _| x.spatial[i] - (du.row(i) * &xu)[(0, 0)]);
    let d = &g_inv * x_dot_xi;
    let x_perp = AmbientVector::new(
        (0..n).map(|k| x.spatial[k] - d[k]).collect(),
        (0..m).map(|b| x.vertical[b] - (0..n).map(|j| d[j] * du[(j, b)]).sum::<f64>()).collect(),
    );
    let x_perp_norm2 = -x_perp.norm2();

    Ok(GeometryFrame {
        g,
        g_inv,
        g_hat,
        lambda,
        v2,
        v2_spectral,
        h_graph,
        h_norm2,
        ii_norm2,
        h_vector,
        x_perp,
        x_perp_norm2,
    })
}
