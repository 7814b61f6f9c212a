//! Membership tests for `O(2n)`, `Sp(2n, R)`, the J-commutant and the
//! Kähler unitary group, plus the K^4 generators of `u(2)`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correspondence::{gamma_inv, ComplexState};
use crate::error::{KahlerError, Result};
use crate::kahler::j_matrix;

const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Orthogonal,
    Symplectic,
    JCommuting,
    KahlerUnitary,
}

impl Membership {
    pub const ALL: [Membership; 4] = [
        Membership::Orthogonal,
        Membership::Symplectic,
        Membership::JCommuting,
        Membership::KahlerUnitary,
    ];
}

/// Frobenius residual behind each membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipResiduals {
    /// `‖MᵀM - I‖`
    pub orthogonal: f64,
    /// `‖MᵀJM - J‖`
    pub symplectic: f64,
    /// `‖MJ - JM‖`
    pub j_commuting: f64,
    /// `max(‖X₁₁ - X₂₂‖, ‖X₁₂ + X₂₁‖)`
    pub block_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub n: usize,
    pub memberships: BTreeSet<Membership>,
    pub residuals: MembershipResiduals,
}

impl MembershipReport {
    pub fn has(&self, m: Membership) -> bool {
        self.memberships.contains(&m)
    }
}

fn check_even_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(KahlerError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(KahlerError::EmptyDimension);
    }
    if !m.nrows().is_multiple_of(2) {
        return Err(KahlerError::OddDimension(m.nrows()));
    }
    Ok(m.nrows() / 2)
}

pub fn check_memberships(m: &DMatrix<f64>) -> Result<MembershipReport> {
    let n = check_even_square(m)?;
    let dim = 2 * n;
    let j = j_matrix(n);
    let id = DMatrix::<f64>::identity(dim, dim);
    let norm = m.norm();
    let linear = MEMBERSHIP_TOL * norm.max(1.0);
    let quadratic = MEMBERSHIP_TOL * (norm * norm).max(1.0);

    let x11 = m.view((0, 0), (n, n));
    let x12 = m.view((0, n), (n, n));
    let x21 = m.view((n, 0), (n, n));
    let x22 = m.view((n, n), (n, n));
    let residuals = MembershipResiduals {
        orthogonal: (m.transpose() * m - &id).norm(),
        symplectic: (m.transpose() * &j * m - &j).norm(),
        j_commuting: (m * &j - &j * m).norm(),
        block_form: (x11 - x22).norm().max((x12 + x21).norm()),
    };

    let mut memberships = BTreeSet::new();
    let orthogonal = residuals.orthogonal <= quadratic;
    if orthogonal {
        memberships.insert(Membership::Orthogonal);
    }
    if residuals.symplectic <= quadratic {
        memberships.insert(Membership::Symplectic);
    }
    if residuals.j_commuting <= linear {
        memberships.insert(Membership::JCommuting);
    }
    if orthogonal && residuals.block_form <= linear {
        memberships.insert(Membership::KahlerUnitary);
    }
    Ok(MembershipReport {
        n,
        memberships,
        residuals,
    })
}

/// A matrix together with memberships verified at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    claimed: BTreeSet<Membership>,
}

impl GroupElement {
    pub fn new(matrix: DMatrix<f64>, claimed: impl IntoIterator<Item = Membership>) -> Result<Self> {
        let report = check_memberships(&matrix)?;
        let claimed: BTreeSet<Membership> = claimed.into_iter().collect();
        if let Some(missing) = claimed.iter().find(|c| !report.has(**c)) {
            return Err(KahlerError::Structural(format!(
                "claimed membership {missing:?} does not hold ({:?})",
                report.residuals
            )));
        }
        Ok(Self { matrix, claimed })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn claimed(&self) -> &BTreeSet<Membership> {
        &self.claimed
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

fn from_rows4(rows: [[f64; 4]; 4]) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| rows[i][j])
}

/// Lifts of `iσ_y`, `iI`, `iσ_x`, `iσ_z`. Every generator is skew-symmetric
/// and commutes with `J`; `G₂ = J`.
pub fn generators() -> [DMatrix<f64>; 4] {
    [
        from_rows4([
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]),
        j_matrix(2),
        from_rows4([
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]),
        from_rows4([
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ]),
    ]
}

/// `exp(Σ θᵢ Gᵢ)` by Padé scaling and squaring.
pub fn exp_generator(coeffs: [f64; 4]) -> Result<GroupElement> {
    let gens = generators();
    let mut x = DMatrix::zeros(4, 4);
    for (g, t) in gens.iter().zip(coeffs) {
        x += g * t;
    }
    GroupElement::new(x.exp(), Membership::ALL)
}

/// `cos φ · I + sin φ · J` on K^4.
pub fn g2(phi: f64) -> DMatrix<f64> {
    let (c, s) = (phi.cos(), phi.sin());
    from_rows4([[c, 0.0, -s, 0.0], [0.0, c, 0.0, -s], [s, 0.0, c, 0.0], [0.0, s, 0.0, c]])
}

/// `max |γ⁻¹(e^{iφ} Z) - g₂(φ) γ⁻¹(Z)|`.
pub fn phase_rotation_equivalence(phi: f64, z: &ComplexState) -> Result<f64> {
    if z.n() != 2 {
        return Err(KahlerError::DimensionMismatch {
            expected: 2,
            found: z.n(),
        });
    }
    let lhs = gamma_inv(&z.scaled(Complex64::from_polar(1.0, phi)));
    let rhs = &g2(phi) * gamma_inv(z).to_stacked();
    Ok((lhs.to_stacked() - rhs).amax())
}

/// `[[R₁, 0], [0, R₂]]`: orthogonal, and neither symplectic nor J-commuting when `R₁ ≠ R₂`.
pub fn block_diagonal(r1: &DMatrix<f64>, r2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if r1.shape() != r2.shape() || r1.nrows() != r1.ncols() {
        return Err(KahlerError::DimensionMismatch {
            expected: r1.nrows(),
            found: r2.nrows(),
        });
    }
    let n = r1.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(r1);
    m.view_mut((n, n), (n, n)).copy_from(r2);
    Ok(m)
}

/// Residuals of the block conditions for `M = [[X, Y], [-Y, X]]` to be symplectic and orthogonal:
/// `XᵀX + YᵀY = I`, `XXᵀ + YYᵀ = I`, `XᵀY` symmetric, `XYᵀ` symmetric.
pub fn symplectic_block_residuals(m: &DMatrix<f64>) -> Result<[f64; 4]> {
    let n = check_even_square(m)?;
    let x = m.view((0, 0), (n, n));
    let y = m.view((0, n), (n, n));
    let id = DMatrix::<f64>::identity(n, n);
    let xty = x.transpose() * y;
    let xyt = x * y.transpose();
    Ok([
        (x.transpose() * x + y.transpose() * y - &id).norm(),
        (x * x.transpose() + y * y.transpose() - &id).norm(),
        (&xty - xty.transpose()).norm(),
        (&xyt - xyt.transpose()).norm(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{lift_operator, ComplexOperator};
    use std::f64::consts::PI;

    #[test]
    fn generators_are_skew_and_j_commuting() {
        let j = j_matrix(2);
        for g in generators() {
            assert_eq!(g.transpose(), -&g);
            assert_eq!(&g * &j, &j * &g);
        }
    }

    #[test]
    fn generators_close_under_commutator() {
        let gens = generators();
        // [G₂, ·] vanishes; the others satisfy su(2) relations
        for g in &gens {
            assert_eq!(&gens[1] * g, g * &gens[1]);
        }
        let comm = |a: &DMatrix<f64>, b: &DMatrix<f64>| a * b - b * a;
        assert_eq!(comm(&gens[0], &gens[2]), &gens[3] * 2.0);
        assert_eq!(comm(&gens[2], &gens[3]), &gens[0] * 2.0);
        assert_eq!(comm(&gens[3], &gens[0]), &gens[2] * 2.0);
    }

    #[test]
    fn j_has_every_membership() {
        let r = check_memberships(&j_matrix(3)).unwrap();
        assert_eq!(r.memberships, Membership::ALL.into_iter().collect());
    }

    #[test]
    fn lifted_unitary_has_every_membership() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexOperator::general(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(s, 0.0),
            ],
        ))
        .unwrap();
        let m = lift_operator(&h).to_matrix();
        let r = check_memberships(&m).unwrap();
        assert_eq!(r.memberships.len(), 4);
        assert!(symplectic_block_residuals(&m).unwrap().iter().all(|&x| x < 1e-15));
    }

    #[test]
    fn swapped_rotations_are_only_orthogonal() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r1 = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let m = block_diagonal(&r1, &r1.transpose()).unwrap();
        let r = check_memberships(&m).unwrap();
        assert_eq!(r.memberships, [Membership::Orthogonal].into_iter().collect());
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(matches!(
            check_memberships(&DMatrix::identity(3, 3)),
            Err(KahlerError::OddDimension(3))
        ));
    }

    #[test]
    fn exp_examples() {
        let id = exp_generator([0.0; 4]).unwrap();
        assert!((id.matrix() - DMatrix::<f64>::identity(4, 4)).norm() < 1e-15);
        let quarter = exp_generator([0.0, PI / 2.0, 0.0, 0.0]).unwrap();
        assert!((quarter.matrix() - j_matrix(2)).amax() < 1e-12);
        for phi in [0.1, 1.3, -2.0, 3.0] {
            let e = exp_generator([0.0, phi, 0.0, 0.0]).unwrap();
            assert!((e.matrix() - g2(phi)).amax() < 1e-12);
        }
        let mixed = exp_generator([0.4, -1.2, 2.0, 0.7]).unwrap();
        assert_eq!(mixed.claimed().len(), 4);
    }

    #[test]
    fn false_claim_rejected() {
        let m = block_diagonal(&DMatrix::identity(2, 2), &-DMatrix::<f64>::identity(2, 2)).unwrap();
        assert!(GroupElement::new(m.clone(), [Membership::Orthogonal]).is_ok());
        assert!(GroupElement::new(m, [Membership::Symplectic]).is_err());
    }

    #[test]
    fn phase_rotation_examples() {
        let z = ComplexState::new(vec![Complex64::new(0.6, -0.2), Complex64::new(0.1, 0.7)]).unwrap();
        assert_eq!(phase_rotation_equivalence(0.0, &z).unwrap(), 0.0);
        assert!(phase_rotation_equivalence(PI, &z).unwrap() < 1e-13);
        assert!(phase_rotation_equivalence(2.1, &z).unwrap() < 1e-15);
    }
}
