//! Spectral decomposition of K-Hermitian operators.
//!
//! Every eigenvalue of `𝓛 = [[S, -A], [A, S]]` is doubly degenerate: if
//! `𝓛v = λv` then `𝓛(Jv) = λ(Jv)`. Decompositions are therefore stored as
//! J-pair representatives `v`; the companion `Jv` and the rank-`2k`
//! projectors are derived on demand.
//!
//! Three routes are provided:
//! - [`eigen_structured`] solves the `n x n` complex Hermitian problem for `S + iA`;
//! - [`eigen_dense`] solves the expanded `2n x 2n` real symmetric problem and
//!   re-pairs each cluster with [`orthonormalize_j_paired`];
//! - [`eigen_closed_form_n2`] evaluates the explicit K^4 formulas.

pub use crate::operator::KahlerOperator;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::correspondence::{gamma_inv, ComplexState};
use crate::error::{KahlerError, Result};
use crate::kahler::{apply_j, metric_g, KahlerVector};

const SOLVER_MAX_ITER: usize = 10_000;
/// Relative residual below which a projected vector counts as already spanned.
const SPAN_EPS: f64 = 1e-6;
/// Eigenvector acceptance for [`orthonormalize_j_paired`], relative to `max(‖𝓛‖, 1)`.
const EIGEN_CHECK: f64 = 1e-8;

/// Distinct eigenvalues (ascending) with their J-paired orthonormal bases.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    n: usize,
    eigenvalues: Vec<f64>,
    representatives: Vec<Vec<KahlerVector>>,
}

impl SpectralDecomposition {
    /// Builds from `(λ, vectors)` clusters. The vectors must already be
    /// orthonormal J-pair representatives.
    fn from_clusters(n: usize, mut clusters: Vec<(f64, Vec<KahlerVector>)>) -> Self {
        clusters.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (eigenvalues, representatives) = clusters.into_iter().unzip();
        Self {
            n,
            eigenvalues,
            representatives,
        }
    }

    /// Groups single-pair eigenpairs into eigenvalue clusters.
    fn from_eigenpairs(n: usize, mut pairs: Vec<(f64, KahlerVector)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let gap = cluster_gap(pairs.iter().map(|p| p.0));
        let mut clusters: Vec<(Vec<f64>, Vec<KahlerVector>)> = Vec::new();
        for (lambda, v) in pairs {
            match clusters.last_mut() {
                Some((values, vectors)) if lambda - values[values.len() - 1] <= gap => {
                    values.push(lambda);
                    vectors.push(v);
                }
                _ => clusters.push((vec![lambda], vec![v])),
            }
        }
        let clusters = clusters
            .into_iter()
            .map(|(values, vectors)| (mean(&values), vectors))
            .collect();
        Self::from_clusters(n, clusters)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Real multiplicities; each is twice the number of J-pairs.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.representatives.iter().map(|r| 2 * r.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn representatives(&self, i: usize) -> &[KahlerVector] {
        &self.representatives[i]
    }

    /// `(v, Jv)` pairs spanning the `i`-th eigenspace.
    pub fn pairs(&self, i: usize) -> Vec<(KahlerVector, KahlerVector)> {
        self.representatives[i]
            .iter()
            .map(|v| (v.clone(), apply_j(v)))
            .collect()
    }

    /// Every `(λ, v)` including the `Jv` companions, in eigenvalue order.
    pub fn eigenvectors(&self) -> Vec<(f64, KahlerVector)> {
        self.eigenvalues
            .iter()
            .zip(&self.representatives)
            .flat_map(|(&lambda, reps)| {
                reps.iter()
                    .flat_map(move |v| [(lambda, v.clone()), (lambda, apply_j(v))])
            })
            .collect()
    }

    /// The real projector `E_i` onto the `i`-th eigenspace.
    pub fn projector(&self, i: usize) -> DMatrix<f64> {
        projectors_from_pairs(&self.representatives[i])
    }

    pub fn projectors(&self) -> Vec<DMatrix<f64>> {
        (0..self.len()).map(|i| self.projector(i)).collect()
    }

    /// `Σ λ_i E_i`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(2 * self.n, 2 * self.n);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            out += self.projector(i) * lambda;
        }
        out
    }

    /// `‖𝓛x - λx‖` maximized over every stored `v` and `Jv`.
    pub fn max_eigen_residual(&self, op: &KahlerOperator) -> f64 {
        self.eigenvectors()
            .iter()
            .map(|(lambda, x)| {
                let lx = op.apply(x).expect("decomposition matches operator dimension");
                (&lx - &x.scaled(*lambda)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Orthogonal `2n x 2n` matrix whose first `n` columns are the
    /// representatives and last `n` their `Jv` companions.
    pub fn eigenbasis(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        for (k, v) in self.representatives.iter().flatten().enumerate() {
            b.set_column(k, &v.to_stacked());
            b.set_column(n + k, &apply_j(v).to_stacked());
        }
        b
    }

    /// `E_i` written in the eigenbasis frame, split into its `q`-block and
    /// `p`-block diagonal parts.
    pub fn frame_split(&self, i: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let offset: usize = self.representatives[..i].iter().map(Vec::len).sum();
        let mut p1 = DMatrix::zeros(2 * n, 2 * n);
        let mut p2 = DMatrix::zeros(2 * n, 2 * n);
        for k in offset..offset + self.representatives[i].len() {
            p1[(k, k)] = 1.0;
            p2[(n + k, n + k)] = 1.0;
        }
        (p1, p2)
    }
}

/// Residuals of the resolution of the identity, all Frobenius norms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProjectorResiduals {
    /// `‖Σ λ_i E_i - 𝓛‖ / ‖𝓛‖`
    pub reconstruction: f64,
    /// `‖Σ E_i - I‖`
    pub completeness: f64,
    /// `max ‖E_i² - E_i‖`
    pub idempotent: f64,
    /// `max_{i≠j} ‖E_i E_j‖`
    pub orthogonal: f64,
    /// `max ‖E_i - E_iᵀ‖`
    pub symmetric: f64,
    /// `max ‖J E_i - E_i J‖`
    pub j_commuting: f64,
}

impl SpectralDecomposition {
    /// Projector algebra residuals in `O(n³)`.
    ///
    /// With `V_i` the `(v, Jv)` columns of cluster `i` and `G_ij = V_iᵀ V_j`,
    /// `‖V_i X V_jᵀ‖² = tr(Xᵀ G_ii X G_jj)`, so products of projectors never
    /// need forming.
    pub fn projector_residuals(&self, op: &KahlerOperator) -> ProjectorResiduals {
        let dim = 2 * self.n;
        let blocks: Vec<DMatrix<f64>> = (0..self.len())
            .map(|i| {
                let cols: Vec<DVector<f64>> = self
                    .pairs(i)
                    .into_iter()
                    .flat_map(|(v, jv)| [v.to_stacked(), jv.to_stacked()])
                    .collect();
                DMatrix::from_columns(&cols)
            })
            .collect();
        let frob = |x: &DMatrix<f64>, gi: &DMatrix<f64>, gj: &DMatrix<f64>| {
            (x.transpose() * gi * x * gj).trace().max(0.0).sqrt()
        };

        let mut out = ProjectorResiduals::default();
        let grams: Vec<DMatrix<f64>> = blocks.iter().map(|v| v.transpose() * v).collect();
        for (i, vi) in blocks.iter().enumerate() {
            let gi = &grams[i];
            let x = gi - DMatrix::<f64>::identity(gi.nrows(), gi.ncols());
            out.idempotent = out.idempotent.max(frob(&x, gi, gi));
            for (j, vj) in blocks.iter().enumerate().skip(i + 1) {
                let gij = vi.transpose() * vj;
                out.orthogonal = out.orthogonal.max(frob(&gij, gi, &grams[j]));
            }
            let e = vi * vi.transpose();
            out.symmetric = out.symmetric.max((&e - e.transpose()).norm());
            out.j_commuting = out.j_commuting.max(j_commutator_norm(&e));
        }

        let b = DMatrix::from_columns(
            &blocks
                .iter()
                .flat_map(|v| v.column_iter().map(|c| c.into_owned()))
                .collect::<Vec<_>>(),
        );
        let lambdas: Vec<f64> = self
            .eigenvalues
            .iter()
            .zip(&self.representatives)
            .flat_map(|(&l, reps)| std::iter::repeat_n(l, 2 * reps.len()))
            .collect();
        let mut b_lambda = b.clone();
        for (k, l) in lambdas.iter().enumerate() {
            let mut col = b_lambda.column_mut(k);
            col *= *l;
        }
        let l = op.to_matrix();
        out.completeness = (&b * b.transpose() - DMatrix::<f64>::identity(dim, dim)).norm();
        out.reconstruction = (b_lambda * b.transpose() - &l).norm() / l.norm().max(f64::MIN_POSITIVE);
        out
    }
}

/// `‖J E - E J‖` without forming `J`.
fn j_commutator_norm(e: &DMatrix<f64>) -> f64 {
    let n = e.nrows() / 2;
    let (e11, e12) = (e.view((0, 0), (n, n)), e.view((0, n), (n, n)));
    let (e21, e22) = (e.view((n, 0), (n, n)), e.view((n, n), (n, n)));
    // J E = [[-E21, -E22], [E11, E12]], E J = [[E12, -E11], [E22, -E21]]
    let a = -e21 - e12;
    let b = e11 - e22;
    (2.0 * (a.norm_squared() + b.norm_squared())).sqrt()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `max(1e-9 · max|λ|, 1e-12)`.
fn cluster_gap(values: impl Iterator<Item = f64>) -> f64 {
    let spread = values.fold(0.0f64, |m, x| m.max(x.abs()));
    (1e-9 * spread).max(1e-12)
}

/// Flips `v` so that its first entry above noise level (q before p) is positive.
fn sign_fix(v: KahlerVector) -> KahlerVector {
    let cutoff = 1e-10 * v.norm();
    let first = v.q().iter().chain(v.p().iter()).copied().find(|x| x.abs() > cutoff);
    match first {
        Some(x) if x < 0.0 => -&v,
        _ => v,
    }
}

/// Solves the complex Hermitian problem for `S + iA` and emits each complex
/// eigenvector `w` as the real pair `(γ⁻¹w, Jγ⁻¹w)`.
pub fn eigen_structured(op: &KahlerOperator) -> Result<SpectralDecomposition> {
    let n = op.n();
    let eig = op
        .to_complex()
        .try_symmetric_eigen(f64::EPSILON, SOLVER_MAX_ITER)
        .ok_or(KahlerError::NoConvergence)?;
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let mut w: DVector<Complex64> = eig.eigenvectors.column(k).into_owned();
        let norm = w.norm();
        w /= Complex64::new(norm, 0.0);
        if let Some(lead) = w.iter().copied().find(|z| z.norm() > 1e-10) {
            w *= lead.conj() / lead.norm();
        }
        let v = gamma_inv(&ComplexState::from_vector(w)?);
        pairs.push((eig.eigenvalues[k], sign_fix(v)));
    }
    Ok(SpectralDecomposition::from_eigenpairs(n, pairs))
}

/// Solves the expanded `2n x 2n` real symmetric problem directly, then
/// re-pairs each eigenvalue cluster.
pub fn eigen_dense(op: &KahlerOperator) -> Result<SpectralDecomposition> {
    let n = op.n();
    let (values, vectors) = dense_eigenpairs(op)?;
    let groups = dense_clusters(&values)?;

    let mut clusters = Vec::with_capacity(groups.len());
    for group in groups {
        let lambda = mean(&group.iter().map(|&k| values[k]).collect::<Vec<_>>());
        let vectors = group
            .iter()
            .map(|&k| KahlerVector::from_stacked(&vectors.column(k).into_owned()))
            .collect::<Result<Vec<_>>>()?;
        let pairs = orthonormalize_j_paired(&vectors, op, lambda)?;
        clusters.push((lambda, pairs.into_iter().map(|(v, _)| v).collect()));
    }
    Ok(SpectralDecomposition::from_clusters(n, clusters))
}

/// Raw solution of the expanded `2n x 2n` symmetric problem: eigenvalues
/// ascending, with matching orthonormal eigenvector columns.
pub fn dense_eigenpairs(op: &KahlerOperator) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = op
        .to_matrix()
        .try_symmetric_eigen(f64::EPSILON, SOLVER_MAX_ITER)
        .ok_or(KahlerError::NoConvergence)?;
    let dim = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Clusters sorted eigenvalues of an expanded operator. If some cluster has
/// odd size the gap is doubled once; a second failure is a structural error.
pub fn dense_clusters(values: &[f64]) -> Result<Vec<Vec<usize>>> {
    let base_gap = cluster_gap(values.iter().copied());
    [base_gap, 2.0 * base_gap]
        .iter()
        .map(|&gap| group_sorted(values, gap))
        .find(|groups| groups.iter().all(|g| g.len() % 2 == 0))
        .ok_or_else(|| KahlerError::Structural("eigenvalue cluster with odd real multiplicity".into()))
}

/// Single-linkage grouping of a sorted slice; returns index groups.
fn group_sorted(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &x) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if x - values[g[g.len() - 1]] <= gap => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// Builds an orthonormal J-paired basis of the span of `vectors`, which must
/// be eigenvectors of `op` for `lambda`.
///
/// Inputs are consumed in order: the next one not yet spanned is normalized
/// into `v`, `Jv` is adjoined, and `span{v, Jv}` is projected out of the rest.
/// Fails with [`KahlerError::Structural`] when the inputs do not span a
/// J-invariant (hence even-dimensional) subspace.
pub fn orthonormalize_j_paired(
    vectors: &[KahlerVector],
    op: &KahlerOperator,
    lambda: f64,
) -> Result<Vec<(KahlerVector, KahlerVector)>> {
    let scale = op.norm().max(1.0);
    for x in vectors {
        x.check_same_dim(&KahlerVector::zeros(op.n())?)?;
        let residual = (&op.apply(x)? - &x.scaled(lambda)).norm();
        if residual > EIGEN_CHECK * scale * x.norm().max(1.0) {
            return Err(KahlerError::NotEigenvector {
                eigenvalue: lambda,
                residual,
            });
        }
    }

    let rank = span_rank(vectors)?;
    let mut basis: Vec<KahlerVector> = Vec::new();
    let mut pairs = Vec::new();
    for x in vectors {
        let original = x.norm();
        if original == 0.0 {
            continue;
        }
        let r = project_out(x, &basis)?;
        if r.norm() <= SPAN_EPS * original {
            continue;
        }
        let v = sign_fix(r.normalized()?);
        // re-project so Jv is exactly orthogonal to earlier pairs
        let v = project_out(&v, &basis)?.normalized()?;
        let jv = apply_j(&v);
        basis.push(v.clone());
        basis.push(jv.clone());
        pairs.push((v, jv));
    }
    if 2 * pairs.len() != rank {
        return Err(KahlerError::Structural(format!(
            "inputs span a {rank}-dimensional space, not a union of J-pairs"
        )));
    }
    Ok(pairs)
}

/// Removes the components of `x` along an orthonormal `basis`, twice for stability.
fn project_out(x: &KahlerVector, basis: &[KahlerVector]) -> Result<KahlerVector> {
    let mut r = x.clone();
    for _ in 0..2 {
        for b in basis {
            let c = metric_g(b, &r)?;
            r = &r - &b.scaled(c);
        }
    }
    Ok(r)
}

fn span_rank(vectors: &[KahlerVector]) -> Result<usize> {
    let mut basis: Vec<KahlerVector> = Vec::new();
    for x in vectors {
        let original = x.norm();
        if original == 0.0 {
            continue;
        }
        let r = project_out(x, &basis)?;
        if r.norm() > SPAN_EPS * original {
            basis.push(r.normalized()?);
        }
    }
    Ok(basis.len())
}

/// `Σ (v vᵀ + Jv (Jv)ᵀ)` over orthonormal J-pair representatives.
pub fn projectors_from_pairs(representatives: &[KahlerVector]) -> DMatrix<f64> {
    let dim = representatives.first().map_or(0, |v| 2 * v.n());
    let mut e = DMatrix::zeros(dim, dim);
    for v in representatives {
        let x = v.to_stacked();
        let jx = apply_j(v).to_stacked();
        e.ger(1.0, &x, &x, 1.0);
        e.ger(1.0, &jx, &jx, 1.0);
    }
    e
}

/// Raw quantities of the explicit K^4 solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormK4 {
    pub kappa: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub w_minus: f64,
    pub w_plus: f64,
    pub w0: f64,
    pub n_minus: f64,
    pub n_plus: f64,
    /// Normalized real eigenvector for `lambda1`.
    pub v1: KahlerVector,
    /// Normalized real eigenvector for `lambda2`.
    pub v2: KahlerVector,
}

/// `true` when `a` is too small for the explicit formulas.
pub fn closed_form_is_singular(s11: f64, s12: f64, s22: f64, a: f64) -> bool {
    a.abs() <= 1e-8 * (s11.abs() + s22.abs() + s12.abs() + 1.0)
}

/// Evaluates the explicit K^4 formulas for
/// `S = [[s11, s12], [s12, s22]]`, `A = [[0, a], [-a, 0]]`.
/// Returns `None` on the singular branch.
pub fn closed_form_k4(s11: f64, s12: f64, s22: f64, a: f64) -> Option<ClosedFormK4> {
    if closed_form_is_singular(s11, s12, s22, a) {
        return None;
    }
    let d = s11 - s22;
    let t = s11 + s22;
    let kappa = (4.0 * a * a + d * d + 4.0 * s12 * s12).sqrt();

    // λ1 λ2 = det and w+ w- = -(1 + w0²): take the well-conditioned root directly
    let det = s11 * s22 - s12 * s12 - a * a;
    let (lambda1, lambda2) = if t >= 0.0 {
        let l2 = (kappa + t) / 2.0;
        (det / l2, l2)
    } else {
        let l1 = (t - kappa) / 2.0;
        (l1, det / l1)
    };
    let w0 = s12 / a;
    let c = 1.0 + w0 * w0;
    let (w_minus, w_plus) = if d >= 0.0 {
        let wp = (kappa + d) / (2.0 * a);
        (-c / wp, wp)
    } else {
        let wm = (d - kappa) / (2.0 * a);
        (wm, -c / wm)
    };
    let norm = |w: f64| c.sqrt() / (c + w * w).sqrt();
    let (n_minus, n_plus) = (norm(w_minus), norm(w_plus));
    let vec = |w: f64, nw: f64| {
        let rho = w / c;
        KahlerVector::new(vec![nw * rho * w0, nw], vec![nw * rho, 0.0]).expect("n = 2")
    };
    Some(ClosedFormK4 {
        kappa,
        lambda1,
        lambda2,
        w_minus,
        w_plus,
        w0,
        n_minus,
        n_plus,
        v1: vec(w_minus, n_minus),
        v2: vec(w_plus, n_plus),
    })
}

/// K^4 decomposition from the explicit formulas; the companions are `J v`.
/// Falls back to [`eigen_structured`] on the singular branch.
pub fn eigen_closed_form_n2(op: &KahlerOperator) -> Result<SpectralDecomposition> {
    if op.n() != 2 {
        return Err(KahlerError::DimensionMismatch {
            expected: 2,
            found: op.n(),
        });
    }
    let (s, a) = (op.s(), op.a());
    let (s11, s12, s22, a12) = (s[(0, 0)], s[(0, 1)], s[(1, 1)], a[(0, 1)]);
    match closed_form_k4(s11, s12, s22, a12) {
        Some(cf) => Ok(SpectralDecomposition::from_eigenpairs(
            2,
            vec![(cf.lambda1, sign_fix(cf.v1)), (cf.lambda2, sign_fix(cf.v2))],
        )),
        None => eigen_structured(op),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{lift_operator, ComplexOperator};
    use crate::kahler::j_matrix;

    fn k4_sample() -> KahlerOperator {
        KahlerOperator::k4(1.0, 0.5, -0.3, 0.7).unwrap()
    }

    fn check_decomposition(op: &KahlerOperator, dec: &SpectralDecomposition) {
        let dim = 2 * op.n();
        let id = DMatrix::<f64>::identity(dim, dim);
        let l = op.to_matrix();
        assert_eq!(dec.multiplicities().iter().sum::<usize>(), dim);
        assert!((dec.reconstruct() - &l).norm() < 1e-10 * l.norm());
        let es = dec.projectors();
        let total: DMatrix<f64> = es.iter().fold(DMatrix::zeros(dim, dim), |acc, e| acc + e);
        assert!((total - &id).norm() < 1e-10);
        let j = j_matrix(op.n());
        for (i, e) in es.iter().enumerate() {
            assert!((e * e - e).norm() < 1e-10);
            assert!((e - e.transpose()).norm() < 1e-12);
            assert!((&j * e - e * &j).norm() < 1e-10);
            for f in &es[i + 1..] {
                assert!((e * f).norm() < 1e-10);
            }
        }
        assert!(dec.max_eigen_residual(op) < 1e-10 * op.norm().max(1.0));
    }

    #[test]
    fn scalar_operator_is_one_cluster() {
        for n in [1, 3, 5] {
            let op = KahlerOperator::scalar(n, 2.5).unwrap();
            for dec in [eigen_structured(&op).unwrap(), eigen_dense(&op).unwrap()] {
                assert_eq!(dec.eigenvalues(), &[2.5]);
                assert_eq!(dec.multiplicities(), vec![2 * n]);
                assert!((dec.projector(0) - DMatrix::<f64>::identity(2 * n, 2 * n)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn k4_eigenvalues_match_formula() {
        let (s11, s12, s22, a) = (1.0f64, 0.5, -0.3, 0.7);
        let kappa = (4.0 * a * a + s11 * s11 - 2.0 * s11 * s22 + 4.0 * s12 * s12 + s22 * s22).sqrt();
        let expected = [(-kappa + s11 + s22) / 2.0, (kappa + s11 + s22) / 2.0];
        let op = k4_sample();
        for dec in [
            eigen_structured(&op).unwrap(),
            eigen_dense(&op).unwrap(),
            eigen_closed_form_n2(&op).unwrap(),
        ] {
            assert_eq!(dec.multiplicities(), vec![2, 2]);
            for (x, y) in dec.eigenvalues().iter().zip(expected) {
                assert!((x - y).abs() < 1e-12);
            }
            check_decomposition(&op, &dec);
        }
    }

    #[test]
    fn closed_form_sigma_y() {
        let cf = closed_form_k4(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(cf.kappa, 2.0);
        assert_eq!((cf.lambda1, cf.lambda2), (-1.0, 1.0));
        let op = lift_operator(&ComplexOperator::pauli_y())
            .into_hermitian(Default::default())
            .unwrap();
        let dec = eigen_closed_form_n2(&op).unwrap();
        assert_eq!(dec.multiplicities(), vec![2, 2]);
        check_decomposition(&op, &dec);
    }

    #[test]
    fn closed_form_fallback_branch() {
        assert!(closed_form_k4(1.0, 0.0, 1.0, 0.0).is_none());
        let id = KahlerOperator::k4(1.0, 0.0, 1.0, 0.0).unwrap();
        let dec = eigen_closed_form_n2(&id).unwrap();
        assert_eq!(dec.eigenvalues(), &[1.0]);
        assert_eq!(dec.multiplicities(), vec![4]);

        let sz = KahlerOperator::k4(1.0, 0.0, -1.0, 0.0).unwrap();
        let dec = eigen_closed_form_n2(&sz).unwrap();
        assert_eq!(dec.eigenvalues(), &[-1.0, 1.0]);
        check_decomposition(&sz, &dec);
    }

    #[test]
    fn closed_form_vectors_solve_eigen_equation() {
        let op = k4_sample();
        let cf = closed_form_k4(1.0, 0.5, -0.3, 0.7).unwrap();
        assert!((cf.w_plus * cf.w_minus + 1.0 + cf.w0 * cf.w0).abs() < 1e-12);
        for (lambda, v) in [(cf.lambda1, &cf.v1), (cf.lambda2, &cf.v2)] {
            assert!((v.norm() - 1.0).abs() < 1e-14);
            for x in [v.clone(), apply_j(v)] {
                let r = &op.apply(&x).unwrap() - &x.scaled(lambda);
                assert!(r.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn representatives_have_positive_lead() {
        let dec = eigen_structured(&k4_sample()).unwrap();
        for i in 0..dec.len() {
            for v in dec.representatives(i) {
                let lead = v.q().iter().chain(v.p().iter()).find(|x| x.abs() > 1e-10).unwrap();
                assert!(*lead > 0.0);
            }
        }
    }

    #[test]
    fn pairing_rejects_odd_span() {
        let op = KahlerOperator::scalar(2, 1.0).unwrap();
        let v = KahlerVector::basis_q(2, 0).unwrap();
        assert!(matches!(
            orthonormalize_j_paired(std::slice::from_ref(&v), &op, 1.0),
            Err(KahlerError::Structural(_))
        ));
        let pairs = orthonormalize_j_paired(&[v.clone(), apply_j(&v)], &op, 1.0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0, v);
    }

    #[test]
    fn pairing_rejects_non_eigenvector() {
        let op = k4_sample();
        let v = KahlerVector::basis_q(2, 0).unwrap();
        assert!(matches!(
            orthonormalize_j_paired(&[v.clone(), apply_j(&v)], &op, 0.0),
            Err(KahlerError::NotEigenvector { .. })
        ));
    }

    #[test]
    fn unit_pair_projector() {
        let e = projectors_from_pairs(&[KahlerVector::basis_q(3, 0).unwrap()]);
        let mut expected = DMatrix::zeros(6, 6);
        expected[(0, 0)] = 1.0;
        expected[(3, 3)] = 1.0;
        assert_eq!(e, expected);
    }

    #[test]
    fn gram_residuals_match_dense_products() {
        let op = KahlerOperator::new(
            DMatrix::from_row_slice(3, 3, &[1.0, 0.2, -0.4, 0.2, 0.5, 0.3, -0.4, 0.3, -1.1]),
            DMatrix::from_row_slice(3, 3, &[0.0, 0.7, 0.1, -0.7, 0.0, -0.6, -0.1, 0.6, 0.0]),
        )
        .unwrap();
        let dec = eigen_dense(&op).unwrap();
        let r = dec.projector_residuals(&op);
        let j = j_matrix(3);
        let es = dec.projectors();
        let dense_j = es.iter().map(|e| (&j * e - e * &j).norm()).fold(0.0, f64::max);
        assert!((r.j_commuting - dense_j).abs() < 1e-15);
        let dense_orth = (0..es.len())
            .flat_map(|i| (i + 1..es.len()).map(move |k| (i, k)))
            .map(|(i, k)| (&es[i] * &es[k]).norm())
            .fold(0.0, f64::max);
        assert!(r.orthogonal < 1e-13 && dense_orth < 1e-13);
        assert!(r.idempotent < 1e-13 && r.completeness < 1e-13 && r.reconstruction < 1e-13);
    }

    #[test]
    fn frame_split_diagonalizes() {
        let op = k4_sample();
        let dec = eigen_structured(&op).unwrap();
        let b = dec.eigenbasis();
        assert!((b.transpose() * &b - DMatrix::<f64>::identity(4, 4)).norm() < 1e-12);
        for i in 0..dec.len() {
            let (p1, p2) = dec.frame_split(i);
            let rotated = b.transpose() * dec.projector(i) * &b;
            assert!((rotated - (p1 + p2)).norm() < 1e-12);
        }
    }
}
