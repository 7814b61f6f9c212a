//! Complex Hilbert-space reference backend.
//!
//! Everything here works from the plain definitions in C^n: explicit
//! summation for inner products, index loops for Kronecker products, and a
//! cyclic Jacobi sweep for Hermitian eigenproblems. Nothing is shared with the
//! structured real-side code paths it is used to check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::correspondence::{ComplexOperator, ComplexState};
use crate::error::{KahlerError, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Tagged oracle output.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    pub computation: &'static str,
}

/// `Σ conj(ψ₁_a) ψ₂_a`.
pub fn oracle_inner(psi1: &ComplexState, psi2: &ComplexState) -> Result<Complex64> {
    if psi1.n() != psi2.n() {
        return Err(KahlerError::DimensionMismatch {
            expected: psi1.n(),
            found: psi2.n(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in psi1.entries().iter().zip(psi2.entries().iter()) {
        acc += a.conj() * b;
    }
    Ok(acc)
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues ascending, with
/// orthonormal eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct OracleEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

/// Cyclic complex Jacobi eigensolver.
pub fn oracle_eigen(h: &ComplexOperator) -> Result<OracleEigen> {
    let n = h.n();
    let mut m = h.matrix().clone();
    let herm_residual = (&m - m.adjoint()).norm();
    if herm_residual > 1e-10 * m.norm().max(1.0) {
        return Err(KahlerError::KindViolation {
            kind: "hermitian",
            residual: herm_residual,
        });
    }
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let total = m.norm();
    let mut converged = n == 1;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * total || total == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(KahlerError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(OracleEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi step annihilating `m[(p, q)]`: a diagonal phase makes the pivot
/// real, then a real plane rotation zeroes it.
fn rotate(m: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let n = m.nrows();
    let hpq = m[(p, q)];
    let r = hpq.norm();
    if r == 0.0 {
        return;
    }
    let phase = hpq / r;
    // column q times conj(phase), row q times phase
    let conj_phase = phase.conj();
    for k in 0..n {
        m[(k, q)] *= conj_phase;
        v[(k, q)] *= conj_phase;
    }
    for k in 0..n {
        m[(q, k)] *= phase;
    }

    let (hpp, hqq) = (m[(p, p)].re, m[(q, q)].re);
    let tau = (hqq - hpp) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = mkp * c - mkq * s;
        m[(k, q)] = mkp * s + mkq * c;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
    for k in 0..n {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = mpk * c - mqk * s;
        m[(q, k)] = mpk * s + mqk * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
}

/// One Born outcome on the complex side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub eigenvalue: f64,
    pub probability: f64,
    /// Complex multiplicity of the eigenvalue.
    pub multiplicity: usize,
}

/// Born probabilities `Σ_k |⟨v_k, ψ⟩|²` over each eigenspace of `h`.
/// Eigenvalues closer than `max(1e-9 ‖h‖, 1e-12)` share an eigenspace.
pub fn oracle_born(psi: &ComplexState, h: &ComplexOperator) -> Result<Vec<OracleOutcome>> {
    if psi.n() != h.n() {
        return Err(KahlerError::DimensionMismatch {
            expected: h.n(),
            found: psi.n(),
        });
    }
    let eig = oracle_eigen(h)?;
    let spread = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = (1e-9 * spread).max(1e-12);
    let mut outcomes: Vec<OracleOutcome> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let mut overlap = Complex64::new(0.0, 0.0);
        for a in 0..psi.n() {
            overlap += col[a].conj() * psi.entries()[a];
        }
        let weight = overlap.norm_sqr();
        match outcomes.last_mut() {
            Some(last_outcome) if lambda - last <= gap => {
                let m = last_outcome.multiplicity as f64;
                last_outcome.eigenvalue = (last_outcome.eigenvalue * m + lambda) / (m + 1.0);
                last_outcome.probability += weight;
                last_outcome.multiplicity += 1;
            }
            _ => outcomes.push(OracleOutcome {
                eigenvalue: lambda,
                probability: weight,
                multiplicity: 1,
            }),
        }
        last = lambda;
    }
    Ok(outcomes)
}

/// `(ψ₁ ⊗ ψ₂)_{a n₂ + b} = ψ₁_a ψ₂_b`.
pub fn oracle_kron(psi1: &ComplexState, psi2: &ComplexState) -> ComplexState {
    let (n1, n2) = (psi1.n(), psi2.n());
    let mut out = DVector::zeros(n1 * n2);
    for a in 0..n1 {
        for b in 0..n2 {
            out[a * n2 + b] = psi1.entries()[a] * psi2.entries()[b];
        }
    }
    ComplexState::from_vector(out).expect("product of non-empty states")
}

/// Kronecker product of two complex matrices, same flattening as [`oracle_kron`].
pub fn oracle_kron_matrix(l1: &DMatrix<Complex64>, l2: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (r1, c1) = l1.shape();
    let (r2, c2) = l2.shape();
    let mut out = DMatrix::zeros(r1 * r2, c1 * c2);
    for i in 0..r1 {
        for j in 0..c1 {
            for k in 0..r2 {
                for l in 0..c2 {
                    out[(i * r2 + k, j * c2 + l)] = l1[(i, j)] * l2[(k, l)];
                }
            }
        }
    }
    out
}

fn mat_vec(m: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// `⟨L₁ ⋯ L_k ψ, φ⟩` by applying the chain right to left.
pub fn oracle_correlation(
    ops: &[DMatrix<Complex64>],
    psi: &ComplexState,
    phi: &ComplexState,
) -> Result<OracleResult<Complex64>> {
    if ops.is_empty() {
        return Err(KahlerError::EmptyChain);
    }
    if psi.n() != phi.n() {
        return Err(KahlerError::DimensionMismatch {
            expected: psi.n(),
            found: phi.n(),
        });
    }
    let mut x: Vec<Complex64> = psi.entries().iter().copied().collect();
    for op in ops.iter().rev() {
        if op.nrows() != x.len() || op.ncols() != x.len() {
            return Err(KahlerError::DimensionMismatch {
                expected: x.len(),
                found: op.nrows(),
            });
        }
        x = mat_vec(op, &x);
    }
    let value = x.iter().zip(phi.entries().iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(OracleResult {
        value,
        computation: "direct operator chain then inner product",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_examples() {
        let a = ComplexState::new(vec![c(1.0, 1.0)]).unwrap();
        let b = ComplexState::new(vec![c(2.0, -1.0)]).unwrap();
        assert_eq!(oracle_inner(&a, &b).unwrap(), c(1.0, -3.0));
        assert_eq!(oracle_inner(&b, &a).unwrap(), c(1.0, -3.0).conj());
        let e = ComplexState::basis(4, 2).unwrap();
        assert_eq!(oracle_inner(&e, &e).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn pauli_z_spectrum() {
        let eig = oracle_eigen(&ComplexOperator::pauli_z()).unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 1.0]);
    }

    #[test]
    fn jacobi_residual_on_fixed_hermitian() {
        let m = DMatrix::from_fn(6, 6, |i, j| {
            let (i, j) = (i as f64, j as f64);
            if i == j {
                c(i - 2.5, 0.0)
            } else if i < j {
                c((i + 2.0 * j).sin(), (i * j).cos())
            } else {
                c((j + 2.0 * i).sin(), -(i * j).cos())
            }
        });
        let h = ComplexOperator::hermitian(m.clone()).unwrap();
        let eig = oracle_eigen(&h).unwrap();
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(6, eig.eigenvalues.iter().map(|&x| c(x, 0.0))));
        let v = &eig.eigenvectors;
        assert!((&m * v - v * lambda).norm() < 1e-12);
        assert!((v.adjoint() * v - DMatrix::identity(6, 6)).norm() < 1e-13);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn born_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexState::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let out = oracle_born(&plus, &ComplexOperator::pauli_z()).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0].probability - 0.5).abs() < 1e-15);
        assert!((out[1].probability - 0.5).abs() < 1e-15);

        let zero = ComplexState::basis(2, 0).unwrap();
        let out = oracle_born(&zero, &ComplexOperator::pauli_z()).unwrap();
        assert_eq!(out[1].eigenvalue, 1.0);
        assert!((out[1].probability - 1.0).abs() < 1e-15);
        assert!(out[0].probability.abs() < 1e-15);

        let id = ComplexOperator::identity(3).unwrap();
        let out = oracle_born(&ComplexState::basis(3, 1).unwrap(), &id).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].multiplicity, 3);
    }

    #[test]
    fn kron_examples() {
        let k = oracle_kron(&ComplexState::basis(2, 0).unwrap(), &ComplexState::basis(2, 1).unwrap());
        assert_eq!(k, ComplexState::basis(4, 1).unwrap());
        let a = ComplexState::new(vec![c(1.0, 1.0), c(0.0, 0.0)]).unwrap();
        let k = oracle_kron(&a, &a);
        assert_eq!(k.entries()[0], c(0.0, 2.0));
        assert!(k.entries().iter().skip(1).all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn correlation_contract() {
        let psi = ComplexState::basis(2, 0).unwrap();
        let phi = ComplexState::basis(2, 1).unwrap();
        assert!(matches!(
            oracle_correlation(&[], &psi, &phi),
            Err(KahlerError::EmptyChain)
        ));
        let sx = ComplexOperator::pauli_x().matrix().clone();
        let r = oracle_correlation(&[sx], &psi, &phi).unwrap();
        assert_eq!(r.value, c(1.0, 0.0));
    }
}
