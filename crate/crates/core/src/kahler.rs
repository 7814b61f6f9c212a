//! The Kähler space K^{2n}: vectors stored as `(q, p)` pairs, the metric `g`,
//! the symplectic form `ω` and the complex structure `J(q, p) = (-p, q)`.
//!
//! Vectors keep their two halves in separate length-`n` arrays. The stacked
//! `[q; p]` column only appears at matrix boundaries ([`KahlerVector::to_stacked`]).

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{KahlerError, Result};

/// Relative/absolute comparison tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-13 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    /// Threshold for a residual measured against a quantity of size `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        (self.rel * scale).max(self.abs)
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.threshold(scale)
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        self.accepts((a - b).abs(), a.abs().max(b.abs()))
    }
}

/// An element `(q, p)` of K^{2n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct KahlerVector {
    q: DVector<f64>,
    p: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    q: Vec<f64>,
    p: Vec<f64>,
}

impl TryFrom<StateJson> for KahlerVector {
    type Error = KahlerError;

    fn try_from(json: StateJson) -> Result<Self> {
        if json.q.len() != json.n {
            return Err(KahlerError::DimensionMismatch {
                expected: json.n,
                found: json.q.len(),
            });
        }
        KahlerVector::new(json.q, json.p)
    }
}

impl From<KahlerVector> for StateJson {
    fn from(v: KahlerVector) -> Self {
        StateJson {
            n: v.n(),
            q: v.q.as_slice().to_vec(),
            p: v.p.as_slice().to_vec(),
        }
    }
}

impl KahlerVector {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        Self::from_parts(DVector::from_vec(q), DVector::from_vec(p))
    }

    pub fn from_parts(q: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(KahlerError::EmptyDimension);
        }
        if q.len() != p.len() {
            return Err(KahlerError::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        if q.iter().chain(p.iter()).any(|x| !x.is_finite()) {
            return Err(KahlerError::NonFinite);
        }
        Ok(Self { q, p })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_parts(DVector::zeros(n), DVector::zeros(n))
    }

    /// `e_a|+⟩`: the vector with `q_a = 1` and everything else zero.
    pub fn basis_q(n: usize, a: usize) -> Result<Self> {
        let mut v = Self::zeros(n)?;
        v.q[a] = 1.0;
        Ok(v)
    }

    /// `e_a|-⟩`: the vector with `p_a = 1` and everything else zero.
    pub fn basis_p(n: usize, a: usize) -> Result<Self> {
        let mut v = Self::zeros(n)?;
        v.p[a] = 1.0;
        Ok(v)
    }

    /// Splits a stacked `[q; p]` column of length `2n`.
    pub fn from_stacked(stacked: &DVector<f64>) -> Result<Self> {
        let len = stacked.len();
        if !len.is_multiple_of(2) {
            return Err(KahlerError::OddDimension(len));
        }
        let n = len / 2;
        Self::from_parts(stacked.rows(0, n).into_owned(), stacked.rows(n, n).into_owned())
    }

    pub fn to_stacked(&self) -> DVector<f64> {
        let n = self.n();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.q);
        out.rows_mut(n, n).copy_from(&self.p);
        out
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    /// Euclidean norm `sqrt(g(x, x))`.
    pub fn norm(&self) -> f64 {
        (self.q.norm_squared() + self.p.norm_squared()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(KahlerError::ZeroVector);
        }
        Ok(self.scaled(1.0 / norm))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            q: &self.q * alpha,
            p: &self.p * alpha,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.q - &other.q)
            .iter()
            .chain((&self.p - &other.p).iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(KahlerError::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(())
    }
}

impl Add<&KahlerVector> for &KahlerVector {
    type Output = KahlerVector;

    fn add(self, rhs: &KahlerVector) -> KahlerVector {
        KahlerVector {
            q: &self.q + &rhs.q,
            p: &self.p + &rhs.p,
        }
    }
}

impl Sub<&KahlerVector> for &KahlerVector {
    type Output = KahlerVector;

    fn sub(self, rhs: &KahlerVector) -> KahlerVector {
        KahlerVector {
            q: &self.q - &rhs.q,
            p: &self.p - &rhs.p,
        }
    }
}

impl Mul<f64> for &KahlerVector {
    type Output = KahlerVector;

    fn mul(self, alpha: f64) -> KahlerVector {
        self.scaled(alpha)
    }
}

impl Neg for &KahlerVector {
    type Output = KahlerVector;

    fn neg(self) -> KahlerVector {
        self.scaled(-1.0)
    }
}

/// The complex structure on K^{2n}. It is applied blockwise and only
/// materialized as a matrix on request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexStructure {
    n: usize,
}

impl ComplexStructure {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(KahlerError::EmptyDimension);
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: &KahlerVector) -> KahlerVector {
        apply_j(x)
    }

    /// The `2n x 2n` matrix `[[0, -I], [I, 0]]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        j_matrix(self.n)
    }
}

/// `[[0, -I], [I, 0]]` of size `2n`.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        j[(a, n + a)] = -1.0;
        j[(n + a, a)] = 1.0;
    }
    j
}

/// `g(x, y) = Σ (x.q_a y.q_a + x.p_a y.p_a)`.
pub fn metric_g(x: &KahlerVector, y: &KahlerVector) -> Result<f64> {
    x.check_same_dim(y)?;
    Ok(x.q.dot(&y.q) + x.p.dot(&y.p))
}

/// `ω(x, y) = Σ (x.q_a y.p_a - y.q_a x.p_a)`.
pub fn symplectic_omega(x: &KahlerVector, y: &KahlerVector) -> Result<f64> {
    x.check_same_dim(y)?;
    Ok(x.q.dot(&y.p) - y.q.dot(&x.p))
}

/// `J(q, p) = (-p, q)`.
pub fn apply_j(x: &KahlerVector) -> KahlerVector {
    KahlerVector {
        q: -&x.p,
        p: x.q.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(q: &[f64], p: &[f64]) -> KahlerVector {
        KahlerVector::new(q.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn metric_examples() {
        assert_eq!(metric_g(&v(&[1.0], &[0.0]), &v(&[1.0], &[0.0])).unwrap(), 1.0);
        assert_eq!(metric_g(&v(&[1.0], &[1.0]), &v(&[2.0], &[-1.0])).unwrap(), 1.0);
        assert_eq!(
            metric_g(&v(&[0.0, 1.0], &[0.0, 0.0]), &v(&[0.0, 0.0], &[0.0, 1.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn omega_examples() {
        let x = v(&[0.3, -1.2], &[2.0, 0.5]);
        assert_eq!(symplectic_omega(&x, &x).unwrap(), 0.0);
        assert_eq!(symplectic_omega(&v(&[1.0], &[1.0]), &v(&[2.0], &[-1.0])).unwrap(), -3.0);
        assert_eq!(symplectic_omega(&v(&[1.0], &[0.0]), &v(&[0.0], &[1.0])).unwrap(), 1.0);
    }

    #[test]
    fn j_examples() {
        assert_eq!(apply_j(&v(&[1.0, 0.0], &[0.0, 0.0])), v(&[0.0, 0.0], &[1.0, 0.0]));
        assert_eq!(apply_j(&v(&[0.0], &[1.0])), v(&[-1.0], &[0.0]));
        let x = v(&[0.7, -2.0, 3.5], &[1.1, 0.0, -0.25]);
        assert_eq!(apply_j(&apply_j(&x)), -&x);
    }

    #[test]
    fn j_matrix_matches_blockwise_action() {
        let x = v(&[0.7, -2.0, 3.5], &[1.1, 0.0, -0.25]);
        let j = ComplexStructure::new(3).unwrap();
        let via_matrix = KahlerVector::from_stacked(&(j.matrix() * x.to_stacked())).unwrap();
        assert_eq!(via_matrix, j.apply(&x));
        let jj = j.matrix() * j.matrix();
        assert_eq!(jj, -DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            KahlerVector::new(vec![], vec![]),
            Err(KahlerError::EmptyDimension)
        ));
        assert!(matches!(
            KahlerVector::new(vec![1.0], vec![1.0, 2.0]),
            Err(KahlerError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            metric_g(&v(&[1.0], &[0.0]), &v(&[1.0, 0.0], &[0.0, 0.0])),
            Err(KahlerError::DimensionMismatch { .. })
        ));
        assert!(matches!(ComplexStructure::new(0), Err(KahlerError::EmptyDimension)));
        assert!(KahlerVector::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn json_format() {
        let x = v(&[1.0, 3.0], &[2.0, -1.0]);
        let text = serde_json::to_string(&x).unwrap();
        assert_eq!(text, r#"{"n":2,"q":[1.0,3.0],"p":[2.0,-1.0]}"#);
        let back: KahlerVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<KahlerVector>(r#"{"n":3,"q":[1.0],"p":[0.0]}"#).is_err());
    }

    #[test]
    fn tolerance_threshold_has_floor() {
        let tol = Tolerance::default();
        assert_eq!(tol.threshold(0.0), 1e-13);
        assert_eq!(tol.threshold(10.0), 1e-9);
        assert!(tol.close(1.0, 1.0 + 1e-11));
        assert!(!tol.close(1.0, 1.0 + 1e-9));
    }
}
