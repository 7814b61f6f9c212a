//! Seeded random instances.
//!
//! Generator: ChaCha8 seeded with `seed_from_u64(seed)`, with stream
//! `(suite << 32) | trial`, so every trial has its own reproducible sequence
//! regardless of how trials are scheduled. Entries are standard normal.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::correspondence::{ComplexOperator, ComplexState, OperatorKind};
use crate::kahler::{KahlerVector, Tolerance};
use crate::operator::KahlerOperator;

pub fn trial_rng(seed: u64, suite: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(suite) << 32) | u64::from(trial));
    rng
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| normal(rng))
}

fn complex_normal_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(n, n, |_, _| Complex64::new(s * normal(rng), s * normal(rng)))
}

/// Unnormalized Gaussian vector.
pub fn vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> KahlerVector {
    let q = (0..n).map(|_| normal(rng)).collect();
    let p = (0..n).map(|_| normal(rng)).collect();
    KahlerVector::new(q, p).expect("n >= 1")
}

/// Gaussian vector scaled to `g(η, η) = 1`.
pub fn state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> KahlerVector {
    loop {
        if let Ok(v) = vector(rng, n).normalized() {
            return v;
        }
    }
}

pub fn complex_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexState {
    crate::correspondence::gamma(&state(rng, n))
}

/// `S = (G + Gᵀ)/2`, `A = (H - Hᵀ)/2`.
pub fn k_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> KahlerOperator {
    let g = normal_matrix(rng, n);
    let h = normal_matrix(rng, n);
    let s = (&g + g.transpose()) * 0.5;
    let a = (&h - h.transpose()) * 0.5;
    KahlerOperator::new(s, a).expect("exactly symmetric blocks")
}

/// Complex Gaussian matrix with no further structure.
pub fn general<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexOperator {
    ComplexOperator::general(complex_normal_matrix(rng, n)).expect("finite square matrix")
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexOperator {
    let z = complex_normal_matrix(rng, n);
    ComplexOperator::hermitian((&z + z.adjoint()) * Complex64::new(0.5, 0.0)).expect("exactly hermitian")
}

fn unitary_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let qr = complex_normal_matrix(rng, n).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Haar-distributed unitary from the QR of a complex Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexOperator {
    ComplexOperator::new(
        unitary_matrix(rng, n),
        OperatorKind::Unitary,
        Tolerance::new(1e-10, 1e-12),
    )
    .expect("QR factor is unitary")
}

/// Orthogonal projector onto a random subspace of random rank `1..=n`.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexOperator {
    let rank = rng.random_range(1..=n);
    let u = unitary_matrix(rng, n);
    let basis = u.columns(0, rank);
    let p = basis * basis.adjoint();
    ComplexOperator::new(p, OperatorKind::Projector, Tolerance::new(1e-10, 1e-12))
        .expect("orthonormal columns give a projector")
}

/// Real orthogonal matrix with determinant `+1`.
pub fn rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let (mut q, r) = normal_matrix(rng, n).qr().unpack();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            let mut col = q.column_mut(k);
            col *= -1.0;
        }
    }
    if q.determinant() < 0.0 {
        let mut col = q.column_mut(0);
        col *= -1.0;
    }
    q
}
