//! Tensor products on Kähler spaces.
//!
//! `⊗_R` is the plain real product: four `(sign₁, sign₂)` blocks of `n₁ n₂`
//! coefficients each, ordered `[++, -+, +-, --]` with `+` meaning a `q`
//! coordinate and `-` a `p` coordinate. `⊗_K` is the complex-compatible
//! product living in K^{2 n₁ n₂}. Composite indices `(a, b)` are flattened
//! row-major, `a * n₂ + b`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{KahlerError, Result};
use crate::kahler::{metric_g, symplectic_omega, KahlerVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

/// Block position of `(s1, s2)` in the flat layout `[++, -+, +-, --]`.
fn block_index(s1: Sign, s2: Sign) -> usize {
    s1.index() + 2 * s2.index()
}

/// Element of `K^{2n₁} ⊗_R K^{2n₂}`, real dimension `4 n₁ n₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensorVector {
    n1: usize,
    n2: usize,
    coefficients: Vec<f64>,
}

impl RealTensorVector {
    pub fn new(n1: usize, n2: usize, coefficients: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(KahlerError::EmptyDimension);
        }
        if coefficients.len() != 4 * n1 * n2 {
            return Err(KahlerError::DimensionMismatch {
                expected: 4 * n1 * n2,
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|x| !x.is_finite()) {
            return Err(KahlerError::NonFinite);
        }
        Ok(Self { n1, n2, coefficients })
    }

    pub fn zeros(n1: usize, n2: usize) -> Result<Self> {
        Self::new(n1, n2, vec![0.0; 4 * n1 * n2])
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn block(&self, s1: Sign, s2: Sign) -> &[f64] {
        let len = self.n1 * self.n2;
        let start = block_index(s1, s2) * len;
        &self.coefficients[start..start + len]
    }

    pub fn get(&self, s1: Sign, s2: Sign, a: usize, b: usize) -> f64 {
        self.block(s1, s2)[a * self.n2 + b]
    }

    pub fn set(&mut self, s1: Sign, s2: Sign, a: usize, b: usize, value: f64) {
        let len = self.n1 * self.n2;
        self.coefficients[block_index(s1, s2) * len + a * self.n2 + b] = value;
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.n1, self.n2) != (other.n1, other.n2) {
            return Err(KahlerError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// `x ⊗_R y`.
pub fn tensor_r(x: &KahlerVector, y: &KahlerVector) -> RealTensorVector {
    let (n1, n2) = (x.n(), y.n());
    let len = n1 * n2;
    let mut coefficients = vec![0.0; 4 * len];
    let factors = [(x.q(), y.q()), (x.p(), y.q()), (x.q(), y.p()), (x.p(), y.p())];
    for (blk, (u, v)) in factors.iter().enumerate() {
        for a in 0..n1 {
            for b in 0..n2 {
                coefficients[blk * len + a * n2 + b] = u[a] * v[b];
            }
        }
    }
    RealTensorVector { n1, n2, coefficients }
}

/// `x ⊗_K y`: `q = q₁q₂ - p₁p₂`, `p = q₁p₂ + p₁q₂` at each `(a, b)`.
pub fn tensor_k(x: &KahlerVector, y: &KahlerVector) -> KahlerVector {
    let (n1, n2) = (x.n(), y.n());
    let mut q = DVector::zeros(n1 * n2);
    let mut p = DVector::zeros(n1 * n2);
    for a in 0..n1 {
        for b in 0..n2 {
            let (q1, p1, q2, p2) = (x.q()[a], x.p()[a], y.q()[b], y.p()[b]);
            q[a * n2 + b] = q1 * q2 - p1 * p2;
            p[a * n2 + b] = q1 * p2 + p1 * q2;
        }
    }
    KahlerVector::from_parts(q, p).expect("non-empty factors")
}

/// `ℙ`: `q = (++) - (--)`, `p = (+-) + (-+)`. Linear on the whole space.
pub fn projector_p(t: &RealTensorVector) -> KahlerVector {
    let pp = t.block(Sign::Plus, Sign::Plus);
    let mp = t.block(Sign::Minus, Sign::Plus);
    let pm = t.block(Sign::Plus, Sign::Minus);
    let mm = t.block(Sign::Minus, Sign::Minus);
    let q = DVector::from_iterator(pp.len(), pp.iter().zip(mm).map(|(a, b)| a - b));
    let p = DVector::from_iterator(pm.len(), pm.iter().zip(mp).map(|(a, b)| a + b));
    KahlerVector::from_parts(q, p).expect("non-empty tensor")
}

/// Sparse `2n₁n₂ x 4n₁n₂` matrix of `ℙ`, rows indexed by the stacked `[q; p]`
/// output and columns by the flat `⊗_R` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, value)`, sorted by row then column.
    pub entries: Vec<(usize, usize, f64)>,
}

impl ProjectorMatrix {
    pub fn apply(&self, t: &RealTensorVector) -> Result<DVector<f64>> {
        if t.dim() != self.cols {
            return Err(KahlerError::DimensionMismatch {
                expected: self.cols,
                found: t.dim(),
            });
        }
        let mut out = DVector::zeros(self.rows);
        for &(r, c, v) in &self.entries {
            out[r] += v * t.coefficients[c];
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }
}

pub fn projector_matrix(n1: usize, n2: usize) -> ProjectorMatrix {
    let len = n1 * n2;
    let at = |s1, s2, k| block_index(s1, s2) * len + k;
    let mut entries = Vec::with_capacity(4 * len);
    for k in 0..len {
        let mut q = [
            (k, at(Sign::Plus, Sign::Plus, k), 1.0),
            (k, at(Sign::Minus, Sign::Minus, k), -1.0),
        ];
        q.sort_by_key(|e| e.1);
        entries.extend(q);
    }
    for k in 0..len {
        let mut p = [
            (len + k, at(Sign::Minus, Sign::Plus, k), 1.0),
            (len + k, at(Sign::Plus, Sign::Minus, k), 1.0),
        ];
        p.sort_by_key(|e| e.1);
        entries.extend(p);
    }
    ProjectorMatrix {
        rows: 2 * len,
        cols: 4 * len,
        entries,
    }
}

/// Euclidean metric on the `⊗_R` space.
pub fn metric_g_r(t: &RealTensorVector, u: &RealTensorVector) -> Result<f64> {
    t.check_same_shape(u)?;
    Ok(t.coefficients.iter().zip(&u.coefficients).map(|(a, b)| a * b).sum())
}

/// `ω ⊗ g + g ⊗ ω` on the `⊗_R` space.
pub fn symplectic_omega_r(t: &RealTensorVector, u: &RealTensorVector) -> Result<f64> {
    use Sign::{Minus, Plus};
    t.check_same_shape(u)?;
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut total = 0.0;
    for s in [Plus, Minus] {
        // first factor pairing, second factor sign `s` fixed
        total += dot(t.block(Plus, s), u.block(Minus, s)) - dot(u.block(Plus, s), t.block(Minus, s));
        // second factor pairing, first factor sign `s` fixed
        total += dot(t.block(s, Plus), u.block(s, Minus)) - dot(u.block(s, Plus), t.block(s, Minus));
    }
    Ok(total)
}

/// Residuals of the four product laws for one quadruple, each divided by
/// `max(1, ‖x‖‖y‖‖u‖‖v‖)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BilinearResiduals {
    pub g_real: f64,
    pub omega_real: f64,
    pub g_kahler: f64,
    pub omega_kahler: f64,
}

impl BilinearResiduals {
    pub fn max(self, other: Self) -> Self {
        Self {
            g_real: self.g_real.max(other.g_real),
            omega_real: self.omega_real.max(other.omega_real),
            g_kahler: self.g_kahler.max(other.g_kahler),
            omega_kahler: self.omega_kahler.max(other.omega_kahler),
        }
    }

    pub fn worst(&self) -> f64 {
        self.g_real
            .max(self.omega_real)
            .max(self.g_kahler)
            .max(self.omega_kahler)
    }
}

/// Checks, for `x, u ∈ K^{2n₁}` and `y, v ∈ K^{2n₂}`:
/// - `g(x⊗_R y, u⊗_R v) = g₁g₂`
/// - `ω(x⊗_R y, u⊗_R v) = ω₁g₂ + g₁ω₂`
/// - `g(x⊗_K y, u⊗_K v) = g₁g₂ - ω₁ω₂`
/// - `ω(x⊗_K y, u⊗_K v) = g₁ω₂ + ω₁g₂`
pub fn tensor_bilinear_forms(
    x: &KahlerVector,
    y: &KahlerVector,
    u: &KahlerVector,
    v: &KahlerVector,
) -> Result<BilinearResiduals> {
    let (g1, w1) = (metric_g(x, u)?, symplectic_omega(x, u)?);
    let (g2, w2) = (metric_g(y, v)?, symplectic_omega(y, v)?);
    let scale = (x.norm() * y.norm() * u.norm() * v.norm()).max(1.0);

    let (tr, ur) = (tensor_r(x, y), tensor_r(u, v));
    let (tk, uk) = (tensor_k(x, y), tensor_k(u, v));
    Ok(BilinearResiduals {
        g_real: (metric_g_r(&tr, &ur)? - g1 * g2).abs() / scale,
        omega_real: (symplectic_omega_r(&tr, &ur)? - (w1 * g2 + g1 * w2)).abs() / scale,
        g_kahler: (metric_g(&tk, &uk)? - (g1 * g2 - w1 * w2)).abs() / scale,
        omega_kahler: (symplectic_omega(&tk, &uk)? - (g1 * w2 + w1 * g2)).abs() / scale,
    })
}
