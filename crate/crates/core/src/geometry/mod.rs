//! Pointwise pseudo-Euclidean algebra on R^{n,m} and the differential
//! geometry of spacelike graphs x -> (x, u(x)).
//!
//! The ambient space carries the quadratic form
//! `|x|^2 = sum(spatial^2) - sum(vertical^2)` in the orthonormal basis
//! `{f_1..f_n, e_1..e_m}`. Graph quantities are computed from the first
//! and second derivatives of the graph map only; no normal frame is built.

mod frame;
pub(crate) mod kernel;
pub(crate) mod small;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub use frame::{geometry_frame, GeometryFrame, GraphJet};

/// Guard band on the eigenvalues of `Du Du^T`: anything at or above
/// `1 - SPACELIKE_EPS` is treated as a loss of spacelikeness.
pub const SPACELIKE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signature {
    pub n: usize,
    pub m: usize,
}

impl Signature {
    pub fn new(n: usize, m: usize) -> Result<Self, GeometryError> {
        if n == 0 || m == 0 {
            return Err(GeometryError::InvalidSignature { n, m });
        }
        Ok(Self { n, m })
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        Self::new(self.n, self.m).map(|_| ())
    }
}

/// A point or vector of R^{n,m}, split into its spacelike (`f`-basis) and
/// timelike (`e`-basis) components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientVector {
    pub spatial: Vec<f64>,
    pub vertical: Vec<f64>,
}

impl AmbientVector {
    pub fn new(spatial: Vec<f64>, vertical: Vec<f64>) -> Self {
        Self { spatial, vertical }
    }

    pub fn zeros(sig: Signature) -> Self {
        Self::new(vec![0.0; sig.n], vec![0.0; sig.m])
    }

    /// The spacelike basis vector `f_i`.
    pub fn f(sig: Signature, i: usize) -> Self {
        let mut v = Self::zeros(sig);
        v.spatial[i] = 1.0;
        v
    }

    /// The timelike basis vector `e_a`.
    pub fn e(sig: Signature, a: usize) -> Self {
        let mut v = Self::zeros(sig);
        v.vertical[a] = 1.0;
        v
    }

    pub fn signature(&self) -> Option<Signature> {
        Signature::new(self.spatial.len(), self.vertical.len()).ok()
    }

    /// The indefinite quadratic form `|x|^2`, which may be negative.
    pub fn norm2(&self) -> f64 {
        let s: f64 = self.spatial.iter().map(|x| x * x).sum();
        let v: f64 = self.vertical.iter().map(|x| x * x).sum();
        s - v
    }

    pub fn is_zero(&self) -> bool {
        self.spatial.iter().chain(&self.vertical).all(|&x| x == 0.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.spatial.iter().zip(&other.spatial).map(|(a, b)| a - b).collect(),
            self.vertical.iter().zip(&other.vertical).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.spatial.iter().zip(&other.spatial).map(|(a, b)| a + b).collect(),
            self.vertical.iter().zip(&other.vertical).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(
            self.spatial.iter().map(|a| a * s).collect(),
            self.vertical.iter().map(|a| a * s).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalClass {
    Spacelike,
    Null,
    Timelike,
}

fn check_dims(x: &AmbientVector, sig: Signature) -> Result<(), GeometryError> {
    if x.spatial.len() != sig.n || x.vertical.len() != sig.m {
        return Err(GeometryError::DimensionMismatch {
            expected: format!("({}, {})", sig.n, sig.m),
            found: format!("({}, {})", x.spatial.len(), x.vertical.len()),
        });
    }
    Ok(())
}

/// The signature-(n, m) bilinear pairing `<x, y>`.
pub fn minkowski_ip(x: &AmbientVector, y: &AmbientVector, sig: Signature) -> Result<f64, GeometryError> {
    check_dims(x, sig)?;
    check_dims(y, sig)?;
    let s: f64 = x.spatial.iter().zip(&y.spatial).map(|(a, b)| a * b).sum();
    let v: f64 = x.vertical.iter().zip(&y.vertical).map(|(a, b)| a * b).sum();
    Ok(s - v)
}

/// Causal character from the exact sign of `|x|^2`. No tolerance band is
/// applied: only an exactly vanishing form is null.
pub fn causal_class(x: &AmbientVector) -> Result<CausalClass, GeometryError> {
    if x.is_zero() {
        return Err(GeometryError::ZeroVector);
    }
    let q = x.norm2();
    Ok(if q > 0.0 {
        CausalClass::Spacelike
    } else if q < 0.0 {
        CausalClass::Timelike
    } else {
        CausalClass::Null
    })
}

/// Cutoff weight `(R^2 - |x|^2 - 2nt)_+`.
pub fn cutoff_eta(x: &AmbientVector, radius: f64, t: f64, sig: Signature) -> Result<f64, GeometryError> {
    check_dims(x, sig)?;
    Ok((radius * radius - x.norm2() - 2.0 * sig.n as f64 * t).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig33() -> Signature {
        Signature::new(3, 3).unwrap()
    }

    #[test]
    fn basis_pairings() {
        let s = sig33();
        let f1 = AmbientVector::f(s, 0);
        let e1 = AmbientVector::e(s, 0);
        assert_eq!(minkowski_ip(&f1, &f1, s).unwrap(), 1.0);
        assert_eq!(minkowski_ip(&e1, &e1, s).unwrap(), -1.0);
        let null = f1.add(&e1);
        assert_eq!(minkowski_ip(&null, &null, s).unwrap(), 0.0);
        assert_eq!(minkowski_ip(&f1, &e1, s).unwrap(), 0.0);
    }

    #[test]
    fn pairing_rejects_mismatched_dimensions() {
        let s = sig33();
        let x = AmbientVector::new(vec![1.0, 0.0], vec![0.0; 3]);
        assert!(matches!(
            minkowski_ip(&x, &x, s),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn causal_classes() {
        let s = Signature::new(2, 2).unwrap();
        assert_eq!(causal_class(&AmbientVector::f(s, 0)).unwrap(), CausalClass::Spacelike);
        assert_eq!(causal_class(&AmbientVector::e(s, 1)).unwrap(), CausalClass::Timelike);
        let null = AmbientVector::new(vec![1.0, 0.0], vec![0.0, 1.0]);
        assert_eq!(causal_class(&null).unwrap(), CausalClass::Null);
        assert_eq!(causal_class(&AmbientVector::zeros(s)), Err(GeometryError::ZeroVector));
    }

    #[test]
    fn cutoff_support() {
        let s = Signature::new(2, 1).unwrap();
        let origin = AmbientVector::zeros(s);
        assert_eq!(cutoff_eta(&origin, 1.0, 0.0, s).unwrap(), 1.0);
        assert_eq!(cutoff_eta(&origin, 1.0, 1.0 / 4.0, s).unwrap(), 0.0);
        let on_sphere = AmbientVector::new(vec![0.0, 1.0], vec![0.0]);
        assert_eq!(cutoff_eta(&on_sphere, 1.0, 0.0, s).unwrap(), 0.0);
        // timelike points sit inside every quasi-sphere cylinder
        let timelike = AmbientVector::new(vec![0.0, 0.0], vec![2.0]);
        assert_eq!(cutoff_eta(&timelike, 1.0, 0.0, s).unwrap(), 5.0);
    }

    #[test]
    fn invalid_signature() {
        assert!(Signature::new(0, 1).is_err());
        assert!(Signature::new(1, 0).is_err());
    }
}
