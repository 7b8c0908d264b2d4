//! Allocation-free symmetric matrix helpers for n <= 3.

pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) const ZERO3: Mat3 = [[0.0; 3]; 3];

/// Eigenvalues of the leading n x n block of a symmetric matrix, ascending.
/// Entries past `n` are left at zero.
pub(crate) fn sym_eigenvalues(a: &Mat3, n: usize) -> [f64; 3] {
    match n {
        1 => [a[0][0], 0.0, 0.0],
        2 => {
            let mean = 0.5 * (a[0][0] + a[1][1]);
            let half = 0.5 * (a[0][0] - a[1][1]);
            let r = (half * half + a[0][1] * a[0][1]).sqrt();
            [mean - r, mean + r, 0.0]
        }
        3 => eig3(a),
        _ => unreachable!("small kernels handle n <= 3"),
    }
}

fn eig3(a: &Mat3) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| x.total_cmp(y));
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *a;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= q;
        for x in row.iter_mut() {
            *x /= p;
        }
    }
    let r = (det(&b, 3) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

pub(crate) fn det(a: &Mat3, n: usize) -> f64 {
    match n {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("small kernels handle n <= 3"),
    }
}

/// Inverse by adjugate. Callers guarantee the matrix is positive definite.
pub(crate) fn inverse(a: &Mat3, n: usize) -> Mat3 {
    let mut inv = ZERO3;
    match n {
        1 => inv[0][0] = 1.0 / a[0][0],
        2 => {
            let d = det(a, 2);
            inv[0][0] = a[1][1] / d;
            inv[1][1] = a[0][0] / d;
            inv[0][1] = -a[0][1] / d;
            inv[1][0] = -a[1][0] / d;
        }
        3 => {
            let d = det(a, 3);
            inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / d;
            inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / d;
            inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / d;
            inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / d;
            inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / d;
            inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / d;
            inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / d;
            inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / d;
            inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / d;
        }
        _ => unreachable!("small kernels handle n <= 3"),
    }
    inv
}
