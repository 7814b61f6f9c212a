//! Seeded differential test batteries and their JSON reports.
//!
//! Each suite draws `trials` random instances per dimension, evaluates a fixed
//! list of checks on every instance and keeps, per check, the worst residual
//! (or the total count for counting checks). Trials run in parallel but are
//! folded in index order, so a report depends only on its inputs.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correspondence::{
    complex_inner, gamma, gamma_inv, lift_operator, lower_map, lower_operator, ComplexOperator, ComplexState,
    OperatorKind,
};
use crate::error::{KahlerError, Result};
use crate::groups::{
    block_diagonal, check_memberships, exp_generator, g2, phase_rotation_equivalence, symplectic_block_residuals,
    Membership,
};
use crate::kahler::{apply_j, metric_g, symplectic_omega, KahlerVector, Tolerance};
use crate::operator::KahlerOperator;
use crate::oracle::{oracle_born, oracle_eigen, oracle_inner, oracle_kron, oracle_kron_matrix};
use crate::quantum::{
    bell_state, bloch_coordinates, bloch_state, born_probabilities_with, computational_basis_observable,
    evaluate_correlation, product_distance_grid, simulate_bell, AnyOperator, AnyState, BornConvention,
    CorrelationQuery,
};
use crate::random;
use crate::spectral::{
    closed_form_k4, dense_clusters, dense_eigenpairs, eigen_closed_form_n2, eigen_dense, eigen_structured,
    orthonormalize_j_paired, projectors_from_pairs, SpectralDecomposition,
};
use crate::tensor::{projector_p, tensor_bilinear_forms, tensor_k, tensor_r};

pub const BELL_SHOTS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Axioms,
    Correspondence,
    Spectral,
    Tensor,
    Born,
    Groups,
    Reconstruction,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 7] = [
        Suite::Axioms,
        Suite::Correspondence,
        Suite::Spectral,
        Suite::Tensor,
        Suite::Born,
        Suite::Groups,
        Suite::Reconstruction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Correspondence => "correspondence",
            Suite::Spectral => "spectral",
            Suite::Tensor => "tensor",
            Suite::Born => "born",
            Suite::Groups => "groups",
            Suite::Reconstruction => "reconstruction",
            Suite::All => "all",
        }
    }

    /// Trials per dimension when none are given.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Axioms | Suite::Correspondence => 10_000,
            Suite::Spectral | Suite::Groups => 500,
            Suite::Tensor => 2_500,
            Suite::Born => 200,
            Suite::Reconstruction => 40,
            Suite::All => 0,
        }
    }

    pub fn default_dims(self) -> Vec<usize> {
        match self {
            Suite::Axioms | Suite::Correspondence => vec![1, 2, 4, 8, 16, 32, 64],
            Suite::Spectral => vec![1, 2, 4, 8, 16, 32],
            Suite::Tensor | Suite::Groups => vec![1, 2, 4, 8],
            Suite::Born | Suite::Reconstruction => vec![1, 2, 4, 8, 16],
            Suite::All => vec![],
        }
    }

    /// Base RNG stream index; sections of a suite use `tag + k`.
    fn tag(self) -> u32 {
        match self {
            Suite::Axioms => 0x100,
            Suite::Correspondence => 0x200,
            Suite::Spectral => 0x300,
            Suite::Tensor => 0x400,
            Suite::Born => 0x500,
            Suite::Groups => 0x600,
            Suite::Reconstruction => 0x700,
            Suite::All => 0,
        }
    }
}

impl FromStr for Suite {
    type Err = KahlerError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::INDIVIDUAL
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| KahlerError::Structural(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Trials per dimension; suite default when `None`.
    pub trials: Option<usize>,
    pub dims: Option<Vec<usize>>,
    /// Replaces every residual tolerance; counting checks stay exact.
    pub tol: Option<f64>,
    pub born: BornConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub dimensions: Vec<usize>,
    /// The `--tol` override, if any; otherwise each check carries its own.
    pub tolerance: Option<f64>,
    pub max_residual: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<VerificationReport>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .or_else(|| self.suites.iter().find_map(|s| s.check(name)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<VerificationReport> {
    if opts.trials == Some(0) {
        return Err(KahlerError::Structural("trials must be at least 1".into()));
    }
    if let Some(dims) = &opts.dims {
        if dims.is_empty() || dims.contains(&0) {
            return Err(KahlerError::EmptyDimension);
        }
    }
    if suite == Suite::All {
        let suites = Suite::INDIVIDUAL
            .iter()
            .map(|&s| run(s, opts))
            .collect::<Result<Vec<_>>>()?;
        let mut dims: Vec<usize> = suites.iter().flat_map(|s| s.dimensions.clone()).collect();
        dims.sort_unstable();
        dims.dedup();
        return Ok(VerificationReport {
            suite: Suite::All.name().into(),
            seed: opts.seed,
            trials: suites.iter().map(|s| s.trials).sum(),
            dimensions: dims,
            tolerance: opts.tol,
            max_residual: suites.iter().map(|s| s.max_residual).fold(0.0, f64::max),
            passed: suites.iter().all(|s| s.passed),
            checks: Vec::new(),
            suites,
        });
    }

    let ctx = Ctx {
        seed: opts.seed,
        tag: suite.tag(),
        trials: opts.trials.unwrap_or(suite.default_trials()),
        dims: opts.dims.clone().unwrap_or_else(|| suite.default_dims()),
        born: opts.born,
    };
    let tally = match suite {
        Suite::Axioms => axioms(&ctx),
        Suite::Correspondence => correspondence(&ctx),
        Suite::Spectral => spectral(&ctx),
        Suite::Tensor => tensor(&ctx),
        Suite::Born => born(&ctx),
        Suite::Groups => groups(&ctx),
        Suite::Reconstruction => reconstruction(&ctx),
        Suite::All => unreachable!(),
    };
    Ok(tally.finish(suite, &ctx, opts.tol))
}

struct Ctx {
    seed: u64,
    tag: u32,
    trials: usize,
    dims: Vec<usize>,
    born: BornConvention,
}

impl Ctx {
    /// Runs `trials` instances for every dimension; `f(rng, n, t)` gets the
    /// within-dimension index `t`.
    fn per_dim<F>(&self, section: u32, f: F) -> Vec<Vec<f64>>
    where
        F: Fn(&mut rand_chacha::ChaCha8Rng, usize, usize) -> Vec<f64> + Sync,
    {
        let total = self.trials * self.dims.len();
        (0..total)
            .into_par_iter()
            .map(|k| {
                let (d, t) = (k / self.trials, k % self.trials);
                let mut rng = random::trial_rng(self.seed, self.tag + section, k as u32);
                f(&mut rng, self.dims[d], t)
            })
            .collect()
    }

    /// Runs `count` dimension-independent instances.
    fn flat<F>(&self, section: u32, count: usize, f: F) -> Vec<Vec<f64>>
    where
        F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> Vec<f64> + Sync,
    {
        (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = random::trial_rng(self.seed, self.tag + section, k as u32);
                f(&mut rng, k)
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Agg {
    Max,
    Count,
}

#[derive(Clone, Copy)]
struct CheckDef {
    name: &'static str,
    tol: f64,
    agg: Agg,
}

const fn worst(name: &'static str, tol: f64) -> CheckDef {
    CheckDef {
        name,
        tol,
        agg: Agg::Max,
    }
}

const fn count(name: &'static str) -> CheckDef {
    CheckDef {
        name,
        tol: 0.0,
        agg: Agg::Count,
    }
}

#[derive(Default)]
struct Tally {
    checks: Vec<(CheckDef, f64)>,
}

impl Tally {
    fn absorb(&mut self, defs: &[CheckDef], rows: Vec<Vec<f64>>) {
        for (i, def) in defs.iter().enumerate() {
            let value = rows.iter().map(|r| r[i]).fold(0.0f64, |acc, x| match def.agg {
                Agg::Max => {
                    if x.is_nan() || acc.is_nan() {
                        f64::NAN
                    } else {
                        acc.max(x)
                    }
                }
                Agg::Count => acc + x,
            });
            self.checks.push((*def, value));
        }
    }

    fn finish(self, suite: Suite, ctx: &Ctx, tol: Option<f64>) -> VerificationReport {
        let checks: Vec<Check> = self
            .checks
            .into_iter()
            .map(|(def, value)| {
                let tolerance = match (def.agg, tol) {
                    (Agg::Max, Some(t)) => t,
                    _ => def.tol,
                };
                // non-finite residuals mark failed evaluations
                let residual = if value.is_finite() { value } else { f64::MAX };
                Check {
                    name: def.name.into(),
                    residual,
                    tolerance,
                    passed: value.is_finite() && residual <= tolerance,
                }
            })
            .collect();
        VerificationReport {
            suite: suite.name().into(),
            seed: ctx.seed,
            trials: ctx.trials,
            dimensions: ctx.dims.clone(),
            tolerance: tol,
            max_residual: checks.iter().map(|c| c.residual).fold(0.0, f64::max),
            passed: checks.iter().all(|c| c.passed),
            checks,
            suites: Vec::new(),
        }
    }
}

/// Largest entry modulus of a complex matrix or vector.
fn complex_amax<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Residual of a fallible evaluation: failures become `∞`.
fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn axioms(ctx: &Ctx) -> Tally {
    const CHECKS: [CheckDef; 11] = [
        worst("g_equals_omega_x_jy", 1e-12),
        worst("omega_equals_g_jx_y", 1e-12),
        worst("g_j_invariant", 1e-12),
        worst("omega_j_invariant", 1e-12),
        worst("g_symmetric", 1e-12),
        worst("omega_antisymmetric", 1e-12),
        worst("g_bilinear", 1e-12),
        worst("omega_bilinear", 1e-12),
        count("g_not_positive"),
        worst("omega_self_pairing", 1e-12),
        worst("j_squared_plus_identity", 1e-12),
    ];
    let rows = ctx.per_dim(0, |rng, n, _| {
        let (x, y, z) = (random::vector(rng, n), random::vector(rng, n), random::vector(rng, n));
        let (alpha, beta) = (random::normal(rng), random::normal(rng));
        let (jx, jy) = (apply_j(&x), apply_j(&y));
        let g = |a: &KahlerVector, b: &KahlerVector| metric_g(a, b).expect("same dimension");
        let w = |a: &KahlerVector, b: &KahlerVector| symplectic_omega(a, b).expect("same dimension");
        let sxy = (x.norm() * y.norm()).max(1.0);
        let combo = &x.scaled(alpha) + &z.scaled(beta);
        let sc = ((alpha.abs() * x.norm() + beta.abs() * z.norm()) * y.norm()).max(1.0);
        vec![
            (g(&x, &y) - w(&x, &jy)).abs() / sxy,
            (w(&x, &y) - g(&jx, &y)).abs() / sxy,
            (g(&jx, &jy) - g(&x, &y)).abs() / sxy,
            (w(&jx, &jy) - w(&x, &y)).abs() / sxy,
            (g(&x, &y) - g(&y, &x)).abs() / sxy,
            (w(&x, &y) + w(&y, &x)).abs() / sxy,
            (g(&combo, &y) - alpha * g(&x, &y) - beta * g(&z, &y)).abs() / sc,
            (w(&combo, &y) - alpha * w(&x, &y) - beta * w(&z, &y)).abs() / sc,
            flag(g(&x, &x) <= 0.0),
            w(&x, &x).abs() / x.norm().powi(2).max(1.0),
            (&apply_j(&jx) + &x).norm() / x.norm().max(1.0),
        ]
    });
    let mut t = Tally::default();
    t.absorb(&CHECKS, rows);
    t
}

/// Trials per dimension that also run the `O(n³)` operator checks.
const OPERATOR_TRIALS: usize = 100;

fn correspondence(ctx: &Ctx) -> Tally {
    const CHECKS: [CheckDef; 9] = [
        worst("inner_product_identity", 1e-12),
        worst("inner_product_vs_oracle", 1e-12),
        count("gamma_round_trip_mismatch"),
        worst("gamma_j_is_multiplication_by_i", 1e-12),
        worst("lift_equivariance", 1e-12),
        worst("lift_homomorphism", 1e-12),
        worst("lift_adjoint_is_transpose", 0.0),
        worst("lift_real_linear", 1e-12),
        worst("lower_lift_round_trip", 0.0),
    ];
    let rows = ctx.per_dim(0, |rng, n, t| {
        let (x1, x2) = (random::vector(rng, n), random::vector(rng, n));
        let (psi1, psi2) = (gamma(&x1), gamma(&x2));
        let scale = (x1.norm() * x2.norm()).max(1.0);
        let inner = complex_inner(&psi1, &psi2).expect("same dimension");
        let real_side = Complex64::new(
            metric_g(&x1, &x2).expect("same dimension"),
            symplectic_omega(&x1, &x2).expect("same dimension"),
        );
        let oracle = oracle_inner(&psi1, &psi2).expect("same dimension");
        let round_trip = gamma_inv(&psi1) != x1;
        let i_psi = psi1.scaled(Complex64::new(0.0, 1.0));
        let j_residual = complex_amax(&(gamma(&apply_j(&x1)).entries() - i_psi.entries()));
        let mut row = vec![
            (inner - real_side).norm() / scale,
            (oracle - real_side).norm() / scale,
            flag(round_trip),
            j_residual / x1.norm().max(1.0),
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ];
        if t < OPERATOR_TRIALS {
            row[4..].copy_from_slice(&operator_checks(rng, n, &psi1));
        }
        row
    });
    let mut t = Tally::default();
    t.absorb(&CHECKS, rows);
    t
}

fn operator_checks<R: Rng>(rng: &mut R, n: usize, psi: &ComplexState) -> [f64; 5] {
    let (l1, l2) = (random::general(rng, n), random::general(rng, n));
    let alpha = random::normal(rng);
    let (m1, m2) = (lift_operator(&l1), lift_operator(&l2));
    let (n1, n2) = (l1.matrix().norm(), l2.matrix().norm());

    let lhs = gamma_inv(&l1.apply(psi).expect("same dimension"));
    let rhs = m1.apply(&gamma_inv(psi)).expect("same dimension");
    let equivariance = (&lhs - &rhs).norm() / (n1 * psi.norm()).max(1.0);

    let product = ComplexOperator::general(l1.matrix() * l2.matrix()).expect("finite");
    let homomorphism =
        (lift_operator(&product).to_matrix() - m1.to_matrix() * m2.to_matrix()).norm() / (n1 * n2).max(1.0);

    let adjoint = (lift_operator(&l1.adjoint()).to_matrix() - m1.to_matrix().transpose()).amax();

    let combo = ComplexOperator::general(l1.matrix() * Complex64::new(alpha, 0.0) + l2.matrix()).expect("finite");
    let linear = (lift_operator(&combo).to_matrix() - (m1.to_matrix() * alpha + m2.to_matrix())).norm()
        / (alpha.abs() * n1 + n2).max(1.0);

    let lowered = lower_map(&m1);
    let relifted = lower_operator(&m1.to_matrix(), Tolerance::default())
        .map(|l| lift_operator(&l).to_matrix())
        .map(|m| (m - m1.to_matrix()).amax())
        .unwrap_or(f64::INFINITY);
    let round_trip = complex_amax(&(lowered.matrix() - l1.matrix())).max(relifted);
    [equivariance, homomorphism, adjoint, linear, round_trip]
}

/// Spectral norm of a K-Hermitian operator from its decomposition.
fn spectral_norm(dec: &SpectralDecomposition) -> f64 {
    dec.eigenvalues()
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE)
}

fn expanded_eigenvalues(dec: &SpectralDecomposition) -> Vec<f64> {
    dec.eigenvalues()
        .iter()
        .zip(dec.multiplicities())
        .flat_map(|(&l, m)| std::iter::repeat_n(l, m))
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spectral(ctx: &Ctx) -> Tally {
    const OPS: [CheckDef; 14] = [
        count("solver_failures"),
        count("odd_multiplicity_clusters"),
        worst("dense_eigen_residual", 1e-10),
        worst("dense_j_partner_residual", 1e-10),
        worst("structured_eigen_residual", 1e-10),
        worst("structured_vs_dense_eigenvalues", 1e-10),
        worst("structured_vs_oracle_eigenvalues", 1e-10),
        worst("reconstruction", 1e-10),
        worst("completeness", 1e-10),
        worst("projector_idempotent", 1e-10),
        worst("projector_orthogonal", 1e-10),
        worst("projector_symmetric", 1e-10),
        worst("projector_j_commuting", 1e-10),
        worst("repaired_dense_reconstruction", 1e-10),
    ];
    let rows = ctx.per_dim(0, |rng, n, _| spectral_trial(&random::k_hermitian(rng, n)));
    let mut t = Tally::default();
    t.absorb(&OPS, rows);

    const CLOSED: [CheckDef; 6] = [
        count("closed_form_failures"),
        worst("closed_form_vs_dense", 1e-9),
        worst("closed_form_vs_structured", 1e-9),
        worst("closed_form_eigen_residual", 1e-10),
        worst("nonorthogonal_basis_repair", 1e-9),
        worst("nonorthogonal_basis_overlap", 1e-9),
    ];
    let rows = ctx.flat(1, 2 * ctx.trials, |rng, _| closed_form_trial(rng));
    t.absorb(&CLOSED, rows);

    const FALLBACK: [CheckDef; 2] = [count("fallback_failures"), worst("fallback_vs_dense", 1e-9)];
    let rows = ctx.flat(2, 2 * ctx.trials, fallback_trial);
    t.absorb(&FALLBACK, rows);
    t
}

fn spectral_trial(op: &KahlerOperator) -> Vec<f64> {
    let fail = || {
        let mut r = vec![f64::INFINITY; 14];
        r[0] = 1.0;
        r[1] = 0.0;
        r
    };
    let Ok(structured) = eigen_structured(op) else {
        return fail();
    };
    let Ok((values, vectors)) = dense_eigenpairs(op) else {
        return fail();
    };
    let scale = spectral_norm(&structured);
    let odd = dense_clusters(&values).is_err();

    let l = op.to_matrix();
    let (mut dense_res, mut partner_res) = (0.0f64, 0.0f64);
    for (k, &lambda) in values.iter().enumerate() {
        let v = KahlerVector::from_stacked(&vectors.column(k).into_owned()).expect("even length");
        let jv = apply_j(&v).to_stacked();
        dense_res = dense_res.max((&l * v.to_stacked() - v.to_stacked() * lambda).norm());
        partner_res = partner_res.max((&l * &jv - &jv * lambda).norm());
    }

    let oracle = lower_map(op.as_map());
    let oracle_values = ComplexOperator::hermitian(oracle.matrix().clone())
        .and_then(|h| oracle_eigen(&h))
        .map(|e| e.eigenvalues.iter().flat_map(|&x| [x, x]).collect::<Vec<_>>());
    let oracle_diff = oracle_values
        .map(|ov| max_abs_diff(&expanded_eigenvalues(&structured), &ov))
        .unwrap_or(f64::INFINITY);

    let pr = structured.projector_residuals(op);
    let repaired = eigen_dense(op)
        .map(|d| d.projector_residuals(op).reconstruction)
        .unwrap_or(f64::INFINITY);
    vec![
        0.0,
        flag(odd || structured.multiplicities().iter().any(|m| m % 2 != 0)),
        dense_res / scale,
        partner_res / scale,
        structured.max_eigen_residual(op) / scale,
        max_abs_diff(&expanded_eigenvalues(&structured), &values) / scale,
        oracle_diff / scale,
        pr.reconstruction,
        pr.completeness,
        pr.idempotent,
        pr.orthogonal,
        pr.symmetric,
        pr.j_commuting,
        repaired,
    ]
}

/// `(s11, s12, s22)` standard normal.
fn k4_params<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    (random::normal(rng), random::normal(rng), random::normal(rng))
}

fn closed_form_trial<R: Rng>(rng: &mut R) -> Vec<f64> {
    let (s11, s12, s22) = k4_params(rng);
    let a = loop {
        let a = random::normal(rng);
        if a.abs() > 0.1 {
            break a;
        }
    };
    let inf = vec![
        1.0,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
    ];
    let (Ok(op), Some(cf)) = (KahlerOperator::k4(s11, s12, s22, a), closed_form_k4(s11, s12, s22, a)) else {
        return inf;
    };
    let (Ok(dense), Ok(structured), Ok(closed)) =
        (dense_eigenpairs(&op), eigen_structured(&op), eigen_closed_form_n2(&op))
    else {
        return inf;
    };
    let scale = spectral_norm(&structured);
    let cf_values = [cf.lambda1, cf.lambda1, cf.lambda2, cf.lambda2];
    let l = op.to_matrix();
    let mut eigen_res = 0.0f64;
    for (lambda, v) in [(cf.lambda1, &cf.v1), (cf.lambda2, &cf.v2)] {
        for x in [v.to_stacked(), apply_j(v).to_stacked()] {
            eigen_res = eigen_res.max((&l * &x - &x * lambda).norm());
        }
    }
    let closed_diff = max_abs_diff(&expanded_eigenvalues(&closed), &cf_values);

    // non-orthogonal eigenvectors of the two eigenspaces; repair them into J-pairs
    let (wm, wp, w0) = (cf.w_minus, cf.w_plus, cf.w0);
    let u = |v: [f64; 4]| KahlerVector::new(vec![v[0], v[1]], vec![v[2], v[3]]).expect("n = 2");
    let spaces = [
        (cf.lambda1, [u([-wm, -w0, 0.0, 1.0]), u([w0, -wp, 1.0, 0.0])], &cf.v1),
        (cf.lambda2, [u([-wp, -w0, 0.0, 1.0]), u([w0, -wm, 1.0, 0.0])], &cf.v2),
    ];
    let mut repair = 0.0f64;
    for (lambda, vs, v) in &spaces {
        repair = repair.max(
            orthonormalize_j_paired(vs, &op, *lambda)
                .map(|pairs| {
                    let reps: Vec<KahlerVector> = pairs.into_iter().map(|(v, _)| v).collect();
                    (projectors_from_pairs(&reps) - projectors_from_pairs(std::slice::from_ref(*v))).norm()
                })
                .unwrap_or(f64::INFINITY),
        );
    }
    let overlap = metric_g(&spaces[0].1[0], &spaces[0].1[1]).expect("n = 2");
    let expected = cf.kappa * s12 / (a * a);
    vec![
        0.0,
        max_abs_diff(&cf_values, &dense.0) / scale,
        max_abs_diff(&cf_values, &expanded_eigenvalues(&structured)).max(closed_diff) / scale,
        eigen_res / scale,
        repair,
        (overlap - expected).abs() / expected.abs().max(1.0),
    ]
}

/// Near-singular `a`, including exact zeros, routed through the fallback.
fn fallback_trial<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let (s11, s12, s22) = k4_params(rng);
    let bound = 1e-8 * (s11.abs() + s22.abs() + s12.abs() + 1.0);
    let a = if k.is_multiple_of(10) {
        0.0
    } else {
        bound * (2.0 * rng.random::<f64>() - 1.0)
    };
    let result = KahlerOperator::k4(s11, s12, s22, a).and_then(|op| {
        let dec = eigen_closed_form_n2(&op)?;
        let (dense, _) = dense_eigenpairs(&op)?;
        Ok(max_abs_diff(&expanded_eigenvalues(&dec), &dense) / spectral_norm(&dec))
    });
    match result {
        Ok(diff) => vec![0.0, diff],
        Err(_) => vec![1.0, f64::INFINITY],
    }
}

fn tensor(ctx: &Ctx) -> Tally {
    const CHECKS: [CheckDef; 10] = [
        worst("projector_maps_real_to_kahler", 1e-13),
        worst("gamma_kahler_product_vs_kronecker", 1e-13),
        worst("g_real_product_law", 1e-11),
        worst("omega_real_product_law", 1e-11),
        worst("g_kahler_product_law", 1e-11),
        worst("omega_kahler_product_law", 1e-11),
        worst("normalized_product_norm", 1e-12),
        worst("lifted_kronecker_intertwining", 1e-11),
        worst("lifted_kronecker_vs_oracle", 1e-12),
        worst("triple_product_associativity", 1e-12),
    ];
    let dims = ctx.dims.clone();
    let rows = ctx.per_dim(0, |rng, n1, _| {
        let n2 = dims[rng.random_range(0..dims.len())];
        let n3 = dims[rng.random_range(0..dims.len())];
        let (x, u) = (random::vector(rng, n1), random::vector(rng, n1));
        let (y, v) = (random::vector(rng, n2), random::vector(rng, n2));
        let xk = tensor_k(&x, &y);
        let p_res = projector_p(&tensor_r(&x, &y)).max_abs_diff(&xk);
        let kron = oracle_kron(&gamma(&x), &gamma(&y));
        let g_res = complex_amax(&(gamma(&xk).entries() - kron.entries()));
        let laws = tensor_bilinear_forms(&x, &y, &u, &v).unwrap_or_else(|_| {
            let inf = f64::INFINITY;
            crate::tensor::BilinearResiduals {
                g_real: inf,
                omega_real: inf,
                g_kahler: inf,
                omega_kahler: inf,
            }
        });
        let (xs, ys) = (x.normalized().expect("nonzero"), y.normalized().expect("nonzero"));
        let norm_res = (tensor_k(&xs, &ys).norm() - 1.0).abs();

        let (l1, l2) = (random::general(rng, n1), random::general(rng, n2));
        let lifted = lift_operator(&l1).kron(&lift_operator(&l2));
        let lhs = lifted.apply(&xk).expect("matching dimension");
        let rhs = tensor_k(
            &lift_operator(&l1).apply(&x).expect("matching dimension"),
            &lift_operator(&l2).apply(&y).expect("matching dimension"),
        );
        let op_scale = (l1.matrix().norm() * l2.matrix().norm() * x.norm() * y.norm()).max(1.0);
        let oracle_lift =
            lift_operator(&ComplexOperator::general(oracle_kron_matrix(l1.matrix(), l2.matrix())).expect("finite"));
        let lift_res =
            (lifted.to_matrix() - oracle_lift.to_matrix()).amax() / (l1.matrix().norm() * l2.matrix().norm()).max(1.0);

        let c = random::state(rng, n3);
        let triple = gamma(&tensor_k(&tensor_k(&xs, &ys), &c));
        let oracle_triple = oracle_kron(&oracle_kron(&gamma(&xs), &gamma(&ys)), &gamma(&c));
        let assoc = complex_amax(&(triple.entries() - oracle_triple.entries()));
        vec![
            p_res,
            g_res,
            laws.g_real,
            laws.omega_real,
            laws.g_kahler,
            laws.omega_kahler,
            norm_res,
            (&lhs - &rhs).norm() / op_scale,
            lift_res,
            assoc,
        ]
    });
    let mut t = Tally::default();
    t.absorb(&CHECKS, rows);
    t
}

fn born(ctx: &Ctx) -> Tally {
    const CHECKS: [CheckDef; 6] = [
        count("evaluation_failures"),
        count("outcome_count_mismatch"),
        worst("real_vs_oracle_probability", 1e-12),
        worst("probability_sum", 1e-10),
        worst("negative_probability", 0.0),
        worst("phase_invariance", 1e-12),
    ];
    let convention = ctx.born;
    let rows = ctx.per_dim(0, |rng, n, _| {
        let eta = random::state(rng, n);
        let op = random::k_hermitian(rng, n);
        let phi = TAU * rng.random::<f64>();
        let rotated = gamma_inv(&gamma(&eta).scaled(Complex64::from_polar(1.0, phi)));
        let h = ComplexOperator::hermitian(op.to_complex());
        let (Ok(real), Ok(rotated), Ok(oracle)) = (
            born_probabilities_with(&eta, &op, convention),
            born_probabilities_with(&rotated, &op, convention),
            h.and_then(|h| oracle_born(&gamma(&eta), &h)),
        ) else {
            return vec![1.0, 0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY];
        };
        let p: Vec<f64> = real.iter().map(|o| o.probability).collect();
        let po: Vec<f64> = oracle.iter().map(|o| o.probability).collect();
        let pr: Vec<f64> = rotated.iter().map(|o| o.probability).collect();
        vec![
            0.0,
            flag(p.len() != po.len()),
            max_abs_diff(&p, &po),
            (p.iter().sum::<f64>() - 1.0).abs(),
            p.iter().fold(0.0f64, |m, &x| m.max(-x)),
            max_abs_diff(&p, &pr),
        ]
    });
    let mut t = Tally::default();
    t.absorb(&CHECKS, rows);

    const BELL: [CheckDef; 8] = [
        worst("bell_norm", 1e-12),
        worst("bell_basis_probabilities", 1e-12),
        worst("bell_00_standard_errors", 3.0),
        worst("bell_11_standard_errors", 3.0),
        count("bell_01_10_counts"),
        count("bell_unassigned_shots"),
        worst("bell_product_distance_below_half", 0.0),
        worst("bloch_round_trip", 1e-12),
    ];
    t.absorb(&BELL, vec![bell_checks(ctx.seed, convention)]);
    t
}

fn bell_checks(seed: u64, convention: BornConvention) -> Vec<f64> {
    let bell = bell_state();
    let probs = computational_basis_observable(4)
        .and_then(|op| born_probabilities_with(&bell, &op, convention))
        .map(|out| out.iter().map(|o| o.probability).collect::<Vec<_>>())
        .map(|p| max_abs_diff(&p, &[0.5, 0.0, 0.0, 0.5]))
        .unwrap_or(f64::INFINITY);
    let (z00, z11, off, unassigned) = match simulate_bell(BELL_SHOTS, seed, convention) {
        Ok(s) => {
            let se = (0.25 / BELL_SHOTS as f64).sqrt();
            let z = |label: &str| (s.frequencies[label] - 0.5).abs() / se;
            (
                z("00"),
                z("11"),
                (s.counts["01"] + s.counts["10"]) as f64,
                s.unassigned as f64,
            )
        }
        Err(_) => (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    let distance = or_inf(product_distance_grid(&bell, 12));
    let shortfall = (0.5 - distance).max(0.0);

    let mut bloch = 0.0f64;
    for i in 1..20 {
        for j in 0..20 {
            let theta = PI * i as f64 / 20.0;
            let phi = TAU * j as f64 / 20.0;
            let (t, p) = bloch_coordinates(&bloch_state(theta, phi)).unwrap_or((f64::INFINITY, 0.0));
            let dp = (p - phi).abs();
            bloch = bloch.max((t - theta).abs()).max(dp.min(TAU - dp));
        }
    }
    vec![
        (bell.norm() - 1.0).abs(),
        probs,
        z00,
        z11,
        off,
        unassigned,
        if distance.is_finite() { shortfall } else { f64::INFINITY },
        bloch,
    ]
}

fn groups(ctx: &Ctx) -> Tally {
    const CHECKS: [CheckDef; 8] = [
        count("lifted_unitary_missing_memberships"),
        worst("lifted_unitary_residual", 1e-11),
        worst("symplectic_block_conditions", 1e-11),
        worst("lowered_element_unitarity", 1e-11),
        count("counterexample_membership_mismatch"),
        count("product_missing_memberships"),
        worst("product_residual", 1e-11),
        count("inverse_missing_memberships"),
    ];
    let rows = ctx.per_dim(0, |rng, n, _| {
        let m = lift_operator(&random::unitary(rng, n)).to_matrix();
        let Ok(report) = check_memberships(&m) else {
            return vec![
                4.0,
                f64::INFINITY,
                f64::INFINITY,
                f64::INFINITY,
                1.0,
                4.0,
                f64::INFINITY,
                4.0,
            ];
        };
        let r = report.residuals;
        let lifted_res = r.orthogonal.max(r.symplectic).max(r.j_commuting).max(r.block_form);
        let blocks = or_inf(symplectic_block_residuals(&m).map(|b| b.iter().copied().fold(0.0, f64::max)));
        let unitarity = lower_operator(&m, Tolerance::default())
            .map(|u| (u.matrix().adjoint() * u.matrix() - DMatrix::<Complex64>::identity(n, n)).norm())
            .unwrap_or(f64::INFINITY);

        let (r1, r2) = if n == 1 {
            (DMatrix::identity(1, 1), -DMatrix::<f64>::identity(1, 1))
        } else {
            (random::rotation(rng, n), random::rotation(rng, n))
        };
        let counter = block_diagonal(&r1, &r2).and_then(|c| check_memberships(&c));
        let mismatch = match counter {
            Ok(c) => flag(c.memberships != [Membership::Orthogonal].into_iter().collect()),
            Err(_) => 1.0,
        };

        let mut product = DMatrix::<f64>::identity(2 * n, 2 * n);
        for _ in 0..10 {
            product *= lift_operator(&random::unitary(rng, n)).to_matrix();
        }
        let missing = |m: &DMatrix<f64>| {
            check_memberships(m)
                .map(|r| 4.0 - r.memberships.len() as f64)
                .unwrap_or(4.0)
        };
        let product_res = check_memberships(&product)
            .map(|r| {
                let r = r.residuals;
                r.orthogonal.max(r.symplectic).max(r.j_commuting).max(r.block_form)
            })
            .unwrap_or(f64::INFINITY);
        vec![
            4.0 - report.memberships.len() as f64,
            lifted_res,
            blocks,
            unitarity,
            mismatch,
            missing(&product),
            product_res,
            missing(&product.transpose()),
        ]
    });
    let mut t = Tally::default();
    t.absorb(&CHECKS, rows);

    const K4: [CheckDef; 3] = [
        count("generator_exp_failures"),
        worst("generator_exp_vs_complex_exp", 1e-12),
        worst("phase_rotation_equivalence", 1e-12),
    ];
    let rows = ctx.flat(1, ctx.trials, |rng, _| {
        let raw: [f64; 4] = std::array::from_fn(|_| random::normal(rng));
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let radius = 10.0 * rng.random::<f64>();
        let theta = raw.map(|x| x * radius / norm);
        let z = random::complex_state(rng, 2);
        let phi = TAU * rng.random::<f64>() - PI;
        let exp_res = match (exp_generator(theta), complex_generator_exp(theta)) {
            (Ok(e), Ok(c)) => (e.matrix() - c).amax(),
            _ => return vec![1.0, f64::INFINITY, or_inf(phase_rotation_equivalence(phi, &z))],
        };
        vec![0.0, exp_res, or_inf(phase_rotation_equivalence(phi, &z))]
    });
    t.absorb(&K4, rows);

    const GRID: [CheckDef; 1] = [worst("g2_columns_on_grid", 1e-12)];
    let rows = (0..100)
        .map(|k| {
            let phi = -PI + TAU * k as f64 / 99.0;
            vec![exp_generator([0.0, phi, 0.0, 0.0])
                .map(|e| (e.matrix() - g2(phi)).amax())
                .unwrap_or(f64::INFINITY)]
        })
        .collect();
    t.absorb(&GRID, rows);
    t
}

/// `lift(exp(i H))` with `H = θ₁σ_y + θ₂I + θ₃σ_x + θ₄σ_z`, via the oracle eigensolver.
fn complex_generator_exp(theta: [f64; 4]) -> Result<DMatrix<f64>> {
    let paulis = [
        ComplexOperator::pauli_y(),
        ComplexOperator::identity(2)?,
        ComplexOperator::pauli_x(),
        ComplexOperator::pauli_z(),
    ];
    let mut h = DMatrix::<Complex64>::zeros(2, 2);
    for (p, t) in paulis.iter().zip(theta) {
        h += p.matrix() * Complex64::new(t, 0.0);
    }
    let eig = oracle_eigen(&ComplexOperator::hermitian(h)?)?;
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        2,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)),
    ));
    let u = v * phases * v.adjoint();
    Ok(lift_operator(&ComplexOperator::general(u)?).to_matrix())
}

fn reconstruction(ctx: &Ctx) -> Tally {
    const CHECKS: [CheckDef; 5] = [
        count("evaluation_failures"),
        worst("chain_relative_residual", 1e-10),
        worst("hermitian_chain_residual", 1e-10),
        worst("unitary_chain_residual", 1e-10),
        worst("projector_chain_residual", 1e-10),
    ];
    let rows = ctx.per_dim(0, |rng, n, t| {
        let k = 1 + t % 5;
        let mut kinds = Vec::with_capacity(k);
        let operators = (0..k)
            .map(|_| {
                let op = match rng.random_range(0..3) {
                    0 => random::hermitian(rng, n),
                    1 => random::unitary(rng, n),
                    _ => random::projector(rng, n),
                };
                kinds.push(op.kind());
                if rng.random::<bool>() {
                    AnyOperator::Kahler(lift_operator(&op))
                } else {
                    AnyOperator::Complex(op)
                }
            })
            .collect();
        let psi = random::complex_state(rng, n);
        let phi = random::complex_state(rng, n);
        let query = CorrelationQuery {
            operators,
            psi: if rng.random::<bool>() {
                AnyState::Complex(psi)
            } else {
                AnyState::Kahler(gamma_inv(&psi))
            },
            phi: AnyState::Complex(phi),
        };
        match evaluate_correlation(&query) {
            Ok(r) => {
                let rel = r.residual / (1.0 + r.value.norm());
                let only = |kind| if kinds.iter().all(|&x| x == kind) { rel } else { 0.0 };
                vec![
                    0.0,
                    rel,
                    only(OperatorKind::Hermitian),
                    only(OperatorKind::Unitary),
                    only(OperatorKind::Projector),
                ]
            }
            Err(_) => vec![1.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY],
        }
    });
    let mut t = Tally::default();
    t.absorb(&CHECKS, rows);
    t
}
