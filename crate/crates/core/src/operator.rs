//! Real operators on K^{2n} that commute with `J`.
//!
//! Every such operator has the block form `[[S, -A], [A, S]]` and is the lift
//! of the complex matrix `S + iA`. [`KahlerMap`] stores an arbitrary pair of
//! blocks (lifts of unitaries, products, ...). [`KahlerOperator`] is the
//! K-Hermitian case: `S` symmetric, `A` antisymmetric.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KahlerError, Result};
use crate::kahler::{KahlerVector, Tolerance};
use crate::matrix_json::{square_from_rows, to_rows};

/// A J-commuting real linear map, stored as its `(S, A)` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct KahlerMap {
    s: DMatrix<f64>,
    a: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct OperatorJson {
    n: usize,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
}

impl TryFrom<OperatorJson> for KahlerMap {
    type Error = KahlerError;

    fn try_from(json: OperatorJson) -> Result<Self> {
        KahlerMap::new(square_from_rows(&json.s, json.n)?, square_from_rows(&json.a, json.n)?)
    }
}

impl From<KahlerMap> for OperatorJson {
    fn from(m: KahlerMap) -> Self {
        OperatorJson {
            n: m.n(),
            s: to_rows(&m.s),
            a: to_rows(&m.a),
        }
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(KahlerError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(KahlerError::EmptyDimension);
    }
    Ok(m.nrows())
}

impl KahlerMap {
    pub fn new(s: DMatrix<f64>, a: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&s)?;
        let na = check_square(&a)?;
        if n != na {
            return Err(KahlerError::DimensionMismatch { expected: n, found: na });
        }
        if s.iter().chain(a.iter()).any(|x| !x.is_finite()) {
            return Err(KahlerError::NonFinite);
        }
        Ok(Self { s, a })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), DMatrix::zeros(n, n))
    }

    /// Reads the blocks of a `2n x 2n` matrix, rejecting it unless
    /// `X11 = X22` and `X12 = -X21` within `tol`.
    pub fn from_matrix(m: &DMatrix<f64>, tol: Tolerance) -> Result<Self> {
        let dim = check_square(m)?;
        if dim % 2 != 0 {
            return Err(KahlerError::OddDimension(dim));
        }
        let n = dim / 2;
        let x11 = m.view((0, 0), (n, n));
        let x12 = m.view((0, n), (n, n));
        let x21 = m.view((n, 0), (n, n));
        let x22 = m.view((n, n), (n, n));
        let scale = m.norm();
        let diag_residual = (x11 - x22).norm();
        if !tol.accepts(diag_residual, scale) {
            return Err(KahlerError::NotJCommuting {
                which: "diagonal blocks differ (X11 != X22)",
                residual: diag_residual,
            });
        }
        let off_residual = (x12 + x21).norm();
        if !tol.accepts(off_residual, scale) {
            return Err(KahlerError::NotJCommuting {
                which: "off-diagonal blocks are not opposite (X12 != -X21)",
                residual: off_residual,
            });
        }
        Self::new(x11.into_owned(), x21.into_owned())
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(m.map(|z| z.re), m.map(|z| z.im))
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// The expanded `[[S, -A], [A, S]]`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.s);
        m.view_mut((n, n), (n, n)).copy_from(&self.s);
        m.view_mut((0, n), (n, n)).copy_from(&(-&self.a));
        m.view_mut((n, 0), (n, n)).copy_from(&self.a);
        m
    }

    /// `S + iA`.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.s.zip_map(&self.a, Complex64::new)
    }

    /// `(S q - A p, A q + S p)`.
    pub fn apply(&self, x: &KahlerVector) -> Result<KahlerVector> {
        if x.n() != self.n() {
            return Err(KahlerError::DimensionMismatch {
                expected: self.n(),
                found: x.n(),
            });
        }
        KahlerVector::from_parts(&self.s * x.q() - &self.a * x.p(), &self.a * x.q() + &self.s * x.p())
    }

    /// `self ∘ rhs`, computed blockwise as `(S1 + iA1)(S2 + iA2)`.
    pub fn compose(&self, rhs: &KahlerMap) -> Result<KahlerMap> {
        if rhs.n() != self.n() {
            return Err(KahlerError::DimensionMismatch {
                expected: self.n(),
                found: rhs.n(),
            });
        }
        Ok(KahlerMap {
            s: &self.s * &rhs.s - &self.a * &rhs.a,
            a: &self.s * &rhs.a + &self.a * &rhs.s,
        })
    }

    /// Real transpose; the lift of the adjoint.
    pub fn transpose(&self) -> KahlerMap {
        KahlerMap {
            s: self.s.transpose(),
            a: -self.a.transpose(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> KahlerMap {
        KahlerMap {
            s: &self.s * alpha,
            a: &self.a * alpha,
        }
    }

    pub fn plus(&self, rhs: &KahlerMap) -> Result<KahlerMap> {
        if rhs.n() != self.n() {
            return Err(KahlerError::DimensionMismatch {
                expected: self.n(),
                found: rhs.n(),
            });
        }
        Ok(KahlerMap {
            s: &self.s + &rhs.s,
            a: &self.a + &rhs.a,
        })
    }

    /// Lift of `(S1 + iA1) ⊗ (S2 + iA2)` in real arithmetic, with the
    /// composite index `(a, b)` flattened row-major in `a`.
    pub fn kron(&self, rhs: &KahlerMap) -> KahlerMap {
        KahlerMap {
            s: self.s.kronecker(&rhs.s) - self.a.kronecker(&rhs.a),
            a: self.s.kronecker(&rhs.a) + self.a.kronecker(&rhs.s),
        }
    }

    /// Frobenius norm of the expanded matrix.
    pub fn norm(&self) -> f64 {
        (2.0 * (self.s.norm_squared() + self.a.norm_squared())).sqrt()
    }

    pub fn symmetry_residuals(&self) -> (f64, f64) {
        (
            (&self.s - self.s.transpose()).norm(),
            (&self.a + self.a.transpose()).norm(),
        )
    }

    pub fn is_k_hermitian(&self, tol: Tolerance) -> bool {
        let (rs, ra) = self.symmetry_residuals();
        let scale = self.norm();
        tol.accepts(rs, scale) && tol.accepts(ra, scale)
    }

    pub fn into_hermitian(self, tol: Tolerance) -> Result<KahlerOperator> {
        KahlerOperator::from_map(self, tol)
    }
}

/// A K-Hermitian operator: `𝓛ᵀ = 𝓛` and `𝓛J = J𝓛`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct KahlerOperator {
    map: KahlerMap,
}

impl TryFrom<OperatorJson> for KahlerOperator {
    type Error = KahlerError;

    fn try_from(json: OperatorJson) -> Result<Self> {
        KahlerOperator::from_map(KahlerMap::try_from(json)?, Tolerance::default())
    }
}

impl From<KahlerOperator> for OperatorJson {
    fn from(op: KahlerOperator) -> Self {
        op.map.into()
    }
}

impl KahlerOperator {
    pub fn new(s: DMatrix<f64>, a: DMatrix<f64>) -> Result<Self> {
        Self::from_map(KahlerMap::new(s, a)?, Tolerance::default())
    }

    pub fn from_map(map: KahlerMap, tol: Tolerance) -> Result<Self> {
        let (rs, ra) = map.symmetry_residuals();
        let scale = map.norm();
        if !tol.accepts(rs, scale) {
            return Err(KahlerError::NotSymmetric { residual: rs });
        }
        if !tol.accepts(ra, scale) {
            return Err(KahlerError::NotAntisymmetric { residual: ra });
        }
        Ok(Self { map })
    }

    /// Accepts a `2n x 2n` real matrix that is symmetric and J-commuting.
    pub fn from_matrix(m: &DMatrix<f64>, tol: Tolerance) -> Result<Self> {
        let residual = (m - m.transpose()).norm();
        if !tol.accepts(residual, m.norm()) {
            return Err(KahlerError::NotSymmetric { residual });
        }
        Self::from_map(KahlerMap::from_matrix(m, tol)?, tol)
    }

    /// `S = s I`, `A = 0`.
    pub fn scalar(n: usize, s: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * s, DMatrix::zeros(n, n))
    }

    /// The general K^4 operator with `S = [[s11, s12], [s12, s22]]`, `A = [[0, a], [-a, 0]]`.
    pub fn k4(s11: f64, s12: f64, s22: f64, a: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_row_slice(2, 2, &[s11, s12, s12, s22]),
            DMatrix::from_row_slice(2, 2, &[0.0, a, -a, 0.0]),
        )
    }

    pub fn n(&self) -> usize {
        self.map.n()
    }

    pub fn s(&self) -> &DMatrix<f64> {
        self.map.s()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        self.map.a()
    }

    pub fn as_map(&self) -> &KahlerMap {
        &self.map
    }

    pub fn into_map(self) -> KahlerMap {
        self.map
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.map.to_matrix()
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.map.to_complex()
    }

    pub fn apply(&self, x: &KahlerVector) -> Result<KahlerVector> {
        self.map.apply(x)
    }

    /// Frobenius norm of the expanded matrix.
    pub fn norm(&self) -> f64 {
        self.map.norm()
    }
}
