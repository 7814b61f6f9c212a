//! Plain-loop reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use kahler::KahlerVector;

pub fn to_complex(x: &KahlerVector) -> Vec<Complex64> {
    x.q()
        .iter()
        .zip(x.p().iter())
        .map(|(&q, &p)| Complex64::new(q, p))
        .collect()
}

/// `Σ conj(aᵢ) bᵢ`.
pub fn conj_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product with the second factor's index running fastest.
pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn mat_vec(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `Σ qᵢq'ᵢ + pᵢp'ᵢ` straight from the coordinates.
pub fn dot_g(x: &KahlerVector, y: &KahlerVector) -> f64 {
    x.q().dot(y.q()) + x.p().dot(y.p())
}

/// `Σ qᵢp'ᵢ − q'ᵢpᵢ`.
pub fn dot_omega(x: &KahlerVector, y: &KahlerVector) -> f64 {
    x.q().dot(y.p()) - y.q().dot(x.p())
}

/// `[[cos φ · I, −sin φ · I], [sin φ · I, cos φ · I]]` on `R^{2n}`.
pub fn rotation_by_phase(n: usize, phi: f64) -> DMatrix<f64> {
    let (c, s) = (phi.cos(), phi.sin());
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj, same) = (i / n, j / n, i % n == j % n);
        match (same, bi, bj) {
            (false, _, _) => 0.0,
            (true, 0, 0) | (true, 1, 1) => c,
            (true, 0, 1) => -s,
            _ => s,
        }
    })
}

pub fn j_dense(n: usize) -> DMatrix<f64> {
    rotation_by_phase(n, std::f64::consts::FRAC_PI_2).map(f64::round)
}

pub fn stacked(x: &KahlerVector) -> DVector<f64> {
    x.to_stacked()
}
