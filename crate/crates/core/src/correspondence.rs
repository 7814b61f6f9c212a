//! The bijection `γ: (q, p) ↦ q + ip` between K^{2n} and C^n, extended to
//! operators by `S + iA ↦ [[S, -A], [A, S]]`.
//!
//! The complex inner product is conjugate-linear in its first argument, so
//! that `⟨ψ₁, ψ₂⟩ = g(γ⁻¹ψ₁, γ⁻¹ψ₂) + i ω(γ⁻¹ψ₁, γ⁻¹ψ₂)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KahlerError, Result};
use crate::kahler::{KahlerVector, Tolerance};
use crate::matrix_json::{from_rows, to_rows};
use crate::operator::KahlerMap;

/// A vector in C^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexStateJson", into = "ComplexStateJson")]
pub struct ComplexState {
    entries: DVector<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct ComplexStateJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<ComplexStateJson> for ComplexState {
    type Error = KahlerError;

    fn try_from(json: ComplexStateJson) -> Result<Self> {
        if json.re.len() != json.im.len() {
            return Err(KahlerError::DimensionMismatch {
                expected: json.re.len(),
                found: json.im.len(),
            });
        }
        ComplexState::new(
            json.re
                .iter()
                .zip(&json.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<ComplexState> for ComplexStateJson {
    fn from(s: ComplexState) -> Self {
        ComplexStateJson {
            re: s.entries.iter().map(|z| z.re).collect(),
            im: s.entries.iter().map(|z| z.im).collect(),
        }
    }
}

impl ComplexState {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(entries))
    }

    pub fn from_vector(entries: DVector<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(KahlerError::EmptyDimension);
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(KahlerError::NonFinite);
        }
        Ok(Self { entries })
    }

    /// `|a⟩` in C^n.
    pub fn basis(n: usize, a: usize) -> Result<Self> {
        let mut v = DVector::zeros(n);
        if a < n {
            v[a] = Complex64::new(1.0, 0.0);
        }
        Self::from_vector(v)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn is_normalized(&self, tol: Tolerance) -> bool {
        tol.close(self.entries.norm_squared(), 1.0)
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        Self {
            entries: &self.entries * z,
        }
    }
}

/// Structural tag of a complex operator, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Hermitian,
    Unitary,
    Projector,
    #[default]
    General,
}

impl OperatorKind {
    fn name(self) -> &'static str {
        match self {
            OperatorKind::Hermitian => "hermitian",
            OperatorKind::Unitary => "unitary",
            OperatorKind::Projector => "a projector",
            OperatorKind::General => "general",
        }
    }
}

/// An `n x n` complex matrix with a verified [`OperatorKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexOperatorJson", into = "ComplexOperatorJson")]
pub struct ComplexOperator {
    matrix: DMatrix<Complex64>,
    kind: OperatorKind,
}

#[derive(Serialize, Deserialize)]
struct ComplexOperatorJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    #[serde(default)]
    kind: OperatorKind,
}

impl TryFrom<ComplexOperatorJson> for ComplexOperator {
    type Error = KahlerError;

    fn try_from(json: ComplexOperatorJson) -> Result<Self> {
        let re = from_rows(&json.re)?;
        let im = from_rows(&json.im)?;
        if re.shape() != im.shape() {
            return Err(KahlerError::DimensionMismatch {
                expected: re.nrows(),
                found: im.nrows(),
            });
        }
        ComplexOperator::new(re.zip_map(&im, Complex64::new), json.kind, Tolerance::default())
    }
}

impl From<ComplexOperator> for ComplexOperatorJson {
    fn from(op: ComplexOperator) -> Self {
        ComplexOperatorJson {
            re: to_rows(&op.matrix.map(|z| z.re)),
            im: to_rows(&op.matrix.map(|z| z.im)),
            kind: op.kind,
        }
    }
}

fn kind_residual(m: &DMatrix<Complex64>, kind: OperatorKind) -> f64 {
    let n = m.nrows();
    match kind {
        OperatorKind::General => 0.0,
        OperatorKind::Hermitian => (m - m.adjoint()).norm(),
        OperatorKind::Unitary => (m.adjoint() * m - DMatrix::identity(n, n)).norm(),
        OperatorKind::Projector => (m * m - m).norm().max((m - m.adjoint()).norm()),
    }
}

impl ComplexOperator {
    pub fn new(matrix: DMatrix<Complex64>, kind: OperatorKind, tol: Tolerance) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(KahlerError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(KahlerError::EmptyDimension);
        }
        if matrix.iter().any(|z| !z.is_finite()) {
            return Err(KahlerError::NonFinite);
        }
        let residual = kind_residual(&matrix, kind);
        let scale = matrix.norm().max(1.0);
        if !tol.accepts(residual, scale) {
            return Err(KahlerError::KindViolation {
                kind: kind.name(),
                residual,
            });
        }
        Ok(Self { matrix, kind })
    }

    pub fn general(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(matrix, OperatorKind::General, Tolerance::default())
    }

    pub fn hermitian(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(matrix, OperatorKind::Hermitian, Tolerance::default())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), OperatorKind::Unitary, Tolerance::default())
    }

    pub fn pauli_x() -> Self {
        Self::from_rows_unchecked(&[[0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]], OperatorKind::Hermitian)
    }

    pub fn pauli_y() -> Self {
        Self::from_rows_unchecked(&[[0.0, 0.0, 0.0, -1.0], [0.0, 1.0, 0.0, 0.0]], OperatorKind::Hermitian)
    }

    pub fn pauli_z() -> Self {
        Self::from_rows_unchecked(&[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0]], OperatorKind::Hermitian)
    }

    /// 2x2 matrix from rows of `(re, im, re, im)`.
    fn from_rows_unchecked(rows: &[[f64; 4]; 2], kind: OperatorKind) -> Self {
        let m = DMatrix::from_fn(2, 2, |i, j| Complex64::new(rows[i][2 * j], rows[i][2 * j + 1]));
        Self { matrix: m, kind }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            kind: self.kind,
        }
    }

    pub fn apply(&self, psi: &ComplexState) -> Result<ComplexState> {
        if psi.n() != self.n() {
            return Err(KahlerError::DimensionMismatch {
                expected: self.n(),
                found: psi.n(),
            });
        }
        ComplexState::from_vector(&self.matrix * psi.entries())
    }

    /// Complex Kronecker product with `(a, b)` flattened row-major in `a`.
    pub fn kron(&self, rhs: &ComplexOperator) -> ComplexOperator {
        let kind = if self.kind == rhs.kind {
            self.kind
        } else {
            OperatorKind::General
        };
        Self {
            matrix: self.matrix.kronecker(&rhs.matrix),
            kind,
        }
    }
}

/// `γ(q, p) = q + ip`.
pub fn gamma(x: &KahlerVector) -> ComplexState {
    ComplexState {
        entries: x.q().zip_map(x.p(), Complex64::new),
    }
}

/// `γ⁻¹(q + ip) = (q, p)`; the exact real/imaginary split.
pub fn gamma_inv(psi: &ComplexState) -> KahlerVector {
    KahlerVector::from_parts(psi.entries.map(|z| z.re), psi.entries.map(|z| z.im))
        .expect("complex states are non-empty and finite")
}

/// `⟨ψ₁, ψ₂⟩ = Σ conj(ψ₁_a) ψ₂_a`, computed through the real and imaginary parts.
pub fn complex_inner(psi1: &ComplexState, psi2: &ComplexState) -> Result<Complex64> {
    if psi1.n() != psi2.n() {
        return Err(KahlerError::DimensionMismatch {
            expected: psi1.n(),
            found: psi2.n(),
        });
    }
    let (q1, p1) = (psi1.entries.map(|z| z.re), psi1.entries.map(|z| z.im));
    let (q2, p2) = (psi2.entries.map(|z| z.re), psi2.entries.map(|z| z.im));
    Ok(Complex64::new(q1.dot(&q2) + p1.dot(&p2), q1.dot(&p2) - p1.dot(&q2)))
}

/// `S + iA ↦ [[S, -A], [A, S]]` for any complex matrix. Use
/// [`KahlerMap::into_hermitian`] to attach the K-Hermitian tag.
pub fn lift_operator(l: &ComplexOperator) -> KahlerMap {
    KahlerMap::from_complex(&l.matrix).expect("complex operators are square, non-empty and finite")
}

/// Inverse of [`lift_operator`] on J-commuting `2n x 2n` matrices.
pub fn lower_operator(m: &DMatrix<f64>, tol: Tolerance) -> Result<ComplexOperator> {
    Ok(lower_map(&KahlerMap::from_matrix(m, tol)?))
}

/// Exact inverse of [`lift_operator`].
pub fn lower_map(map: &KahlerMap) -> ComplexOperator {
    ComplexOperator {
        matrix: map.to_complex(),
        kind: OperatorKind::General,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{apply_j, metric_g, symplectic_omega};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_examples() {
        let x = KahlerVector::new(vec![1.0, 3.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(gamma(&x), ComplexState::new(vec![c(1.0, 2.0), c(3.0, -1.0)]).unwrap());
        assert_eq!(gamma_inv(&gamma(&x)), x);
        let real = KahlerVector::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(gamma(&real).entries()[0], c(1.0, 0.0));
        let zero = ComplexState::new(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(gamma_inv(&zero), KahlerVector::zeros(1).unwrap());
    }

    #[test]
    fn j_is_multiplication_by_i() {
        let x = KahlerVector::new(vec![0.4, -1.5, 2.0], vec![1.0, 0.25, -3.0]).unwrap();
        let lhs = gamma(&apply_j(&x));
        let rhs = gamma(&x).scaled(c(0.0, 1.0));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn inner_product_examples() {
        let psi1 = ComplexState::new(vec![c(1.0, 1.0)]).unwrap();
        let psi2 = ComplexState::new(vec![c(2.0, -1.0)]).unwrap();
        let z = complex_inner(&psi1, &psi2).unwrap();
        assert_eq!(z, c(1.0, -3.0));
        let (x, y) = (gamma_inv(&psi1), gamma_inv(&psi2));
        assert_eq!(metric_g(&x, &y).unwrap(), z.re);
        assert_eq!(symplectic_omega(&x, &y).unwrap(), z.im);

        let e1 = ComplexState::basis(3, 0).unwrap();
        assert_eq!(complex_inner(&e1, &e1).unwrap(), c(1.0, 0.0));

        let psi = ComplexState::new(vec![c(0.3, -2.0), c(1.0, 0.5)]).unwrap();
        let nn = complex_inner(&psi, &psi).unwrap();
        assert_eq!(nn.im, 0.0);
        assert!(nn.re > 0.0);
        assert!(complex_inner(&psi, &e1).is_err());
    }

    #[test]
    fn lift_examples() {
        let sy = lift_operator(&ComplexOperator::pauli_y());
        assert_eq!(sy.s(), &DMatrix::zeros(2, 2));
        assert_eq!(sy.a(), &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert!(sy.is_k_hermitian(Tolerance::default()));

        let id = lift_operator(&ComplexOperator::identity(3).unwrap());
        assert_eq!(id.to_matrix(), DMatrix::identity(6, 6));
    }

    #[test]
    fn lower_examples() {
        let (s11, s12, s22, a) = (1.0, 0.5, -0.3, 0.7);
        #[rustfmt::skip]
        let l4 = DMatrix::from_row_slice(4, 4, &[
            s11, s12, 0.0, -a,
            s12, s22, a, 0.0,
            0.0, a, s11, s12,
            -a, 0.0, s12, s22,
        ]);
        let l2 = lower_operator(&l4, Tolerance::default()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(s11, 0.0), c(s12, a), c(s12, -a), c(s22, 0.0)]);
        assert_eq!(l2.matrix(), &expected);

        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            lower_operator(&bad, Tolerance::default()),
            Err(KahlerError::NotJCommuting { .. })
        ));
    }

    #[test]
    fn operator_kind_checks() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(ComplexOperator::hermitian(m.clone()).is_err());
        assert!(ComplexOperator::general(m).is_ok());
        let proj = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(ComplexOperator::new(proj, OperatorKind::Projector, Tolerance::default()).is_ok());
        let not_unitary = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            ComplexOperator::new(not_unitary, OperatorKind::Unitary, Tolerance::default()),
            Err(KahlerError::KindViolation { .. })
        ));
        for p in [
            ComplexOperator::pauli_x(),
            ComplexOperator::pauli_y(),
            ComplexOperator::pauli_z(),
        ] {
            assert!(ComplexOperator::new(p.matrix().clone(), OperatorKind::Unitary, Tolerance::default()).is_ok());
            assert!(ComplexOperator::hermitian(p.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn complex_json_formats() {
        let op: ComplexOperator =
            serde_json::from_str(r#"{"re":[[0,1],[1,0]],"im":[[0,0],[0,0]],"kind":"hermitian"}"#).unwrap();
        assert_eq!(op, ComplexOperator::pauli_x());
        let general: ComplexOperator = serde_json::from_str(r#"{"re":[[1,2],[3,4]],"im":[[0,0],[0,0]]}"#).unwrap();
        assert_eq!(general.kind(), OperatorKind::General);
        assert!(serde_json::from_str::<ComplexOperator>(
            r#"{"re":[[1,2],[3,4]],"im":[[0,0],[0,0]],"kind":"hermitian"}"#
        )
        .is_err());
        let psi: ComplexState = serde_json::from_str(r#"{"re":[1,0],"im":[0,1]}"#).unwrap();
        assert_eq!(psi.entries()[1], c(0.0, 1.0));
    }
}
