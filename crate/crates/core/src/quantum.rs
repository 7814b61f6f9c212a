//! States, measurement and correlations on K^{2n}.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correspondence::{gamma, gamma_inv, lift_operator, ComplexOperator, ComplexState};
use crate::error::{KahlerError, Result};
use crate::kahler::{metric_g, symplectic_omega, KahlerVector, Tolerance};
use crate::operator::{KahlerMap, KahlerOperator};
use crate::oracle::oracle_correlation;
use crate::random::trial_rng;
use crate::spectral::{eigen_structured, SpectralDecomposition};
use crate::tensor::tensor_k;

/// Stream tag for the Bell sampler.
const BELL_STREAM: u32 = 0xbe11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub eigenvalue: f64,
    pub probability: f64,
    pub projector_rank: usize,
}

/// How `g(η, E_i η)` becomes a probability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BornConvention {
    /// `p_i = g(η, E_i η)`; sums to one.
    #[default]
    Normalized,
    /// `p_i = g(η, E_i η) / rank(E_i)`; kept for comparison only, does not sum to one.
    RankDivisor,
}

fn check_normalized(eta: &KahlerVector) -> Result<()> {
    let norm_sq = metric_g(eta, eta)?;
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(KahlerError::NotNormalized { norm_sq });
    }
    Ok(())
}

pub fn born_probabilities(eta: &KahlerVector, op: &KahlerOperator) -> Result<Vec<MeasurementOutcome>> {
    born_probabilities_with(eta, op, BornConvention::Normalized)
}

pub fn born_probabilities_with(
    eta: &KahlerVector,
    op: &KahlerOperator,
    convention: BornConvention,
) -> Result<Vec<MeasurementOutcome>> {
    if eta.n() != op.n() {
        return Err(KahlerError::DimensionMismatch {
            expected: op.n(),
            found: eta.n(),
        });
    }
    check_normalized(eta)?;
    born_from_decomposition(eta, &eigen_structured(op)?, convention)
}

/// Born probabilities against an existing decomposition. `g(η, E_i η)` is
/// evaluated from the stored pairs without forming `E_i`.
pub fn born_from_decomposition(
    eta: &KahlerVector,
    dec: &SpectralDecomposition,
    convention: BornConvention,
) -> Result<Vec<MeasurementOutcome>> {
    let mut out = Vec::with_capacity(dec.len());
    for (i, rank) in dec.multiplicities().into_iter().enumerate() {
        let mut weight = 0.0;
        for (v, jv) in dec.pairs(i) {
            weight += metric_g(&v, eta)?.powi(2) + metric_g(&jv, eta)?.powi(2);
        }
        let probability = match convention {
            BornConvention::Normalized => weight,
            BornConvention::RankDivisor => weight / rank as f64,
        };
        out.push(MeasurementOutcome {
            eigenvalue: dec.eigenvalues()[i],
            probability,
            projector_rank: rank,
        });
    }
    Ok(out)
}

/// Post-measurement state `E_i η / ‖E_i η‖`.
pub fn collapse(eta: &KahlerVector, dec: &SpectralDecomposition, i: usize) -> Result<KahlerVector> {
    let mut acc = KahlerVector::zeros(eta.n())?;
    for (v, jv) in dec.pairs(i) {
        acc = &acc + &v.scaled(metric_g(&v, eta)?);
        acc = &acc + &jv.scaled(metric_g(&jv, eta)?);
    }
    acc.normalized()
}

/// Composite state of two systems, `η₁ ⊗_K η₂`.
pub fn compose_systems(eta1: &KahlerVector, eta2: &KahlerVector) -> KahlerVector {
    tensor_k(eta1, eta2)
}

/// `γ⁻¹((|00⟩ + |11⟩)/√2)` in K^8.
pub fn bell_state() -> KahlerVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e0 = KahlerVector::basis_q(2, 0).expect("n = 2");
    let e1 = KahlerVector::basis_q(2, 1).expect("n = 2");
    (&compose_systems(&e0, &e0) + &compose_systems(&e1, &e1)).scaled(s)
}

/// Lift of `diag(0, 1, ..., n-1)`; outcome `k` is basis state `k`.
pub fn computational_basis_observable(n: usize) -> Result<KahlerOperator> {
    let diag = DMatrix::from_fn(n, n, |i, j| if i == j { i as f64 } else { 0.0 });
    KahlerOperator::new(diag, DMatrix::zeros(n, n))
}

/// Index of the first category whose cumulative weight exceeds `u`,
/// or `None` when `u` lies past the total mass.
pub fn sample_index(probabilities: &[f64], u: f64) -> Option<usize> {
    let mut acc = 0.0;
    for (k, p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellSample {
    pub shots: u64,
    pub seed: u64,
    pub probabilities: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub frequencies: BTreeMap<String, f64>,
    /// Shots that landed outside the total probability mass.
    pub unassigned: u64,
}

/// Samples the Bell state in the two-qubit computational basis.
pub fn simulate_bell(shots: u64, seed: u64, convention: BornConvention) -> Result<BellSample> {
    let labels = ["00", "01", "10", "11"];
    let outcomes = born_probabilities_with(&bell_state(), &computational_basis_observable(4)?, convention)?;
    // diag(0, 1, 2, 3) has four simple eigenvalues, ascending
    let probs: Vec<f64> = outcomes.iter().map(|o| o.probability).collect();
    let mut rng = trial_rng(seed, BELL_STREAM, 0);
    let mut counts = [0u64; 4];
    let mut unassigned = 0;
    for _ in 0..shots {
        match sample_index(&probs, rng.random::<f64>()) {
            Some(k) => counts[k] += 1,
            None => unassigned += 1,
        }
    }
    let denom = shots.max(1) as f64;
    Ok(BellSample {
        shots,
        seed,
        probabilities: labels
            .iter()
            .map(|l| l.to_string())
            .zip(probs.iter().copied())
            .collect(),
        counts: labels.iter().map(|l| l.to_string()).zip(counts).collect(),
        frequencies: labels
            .iter()
            .map(|l| l.to_string())
            .zip(counts.iter().map(|&c| c as f64 / denom))
            .collect(),
        unassigned,
    })
}

/// Normalized single-qubit state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` as a K^4 vector.
pub fn bloch_state(theta: f64, phi: f64) -> KahlerVector {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    KahlerVector::new(vec![c, s * phi.cos()], vec![0.0, s * phi.sin()]).expect("n = 2")
}

/// `(θ, φ)` with `θ ∈ [0, π]`, `φ ∈ [0, 2π)`, global phase making the `|0⟩`
/// coefficient real nonnegative. `φ = 0` at the poles.
pub fn bloch_coordinates(eta: &KahlerVector) -> Result<(f64, f64)> {
    if eta.n() != 2 {
        return Err(KahlerError::DimensionMismatch {
            expected: 2,
            found: eta.n(),
        });
    }
    let psi = gamma(&eta.normalized()?);
    let (alpha, beta) = (psi.entries()[0], psi.entries()[1]);
    let theta = (2.0 * beta.norm().atan2(alpha.norm())).clamp(0.0, PI);
    if alpha.norm() < 1e-12 || beta.norm() < 1e-12 {
        return Ok((theta, 0.0));
    }
    let mut phi = (beta.arg() - alpha.arg()).rem_euclid(TAU);
    if phi >= TAU {
        phi = 0.0;
    }
    Ok((theta, phi))
}

/// An operator in either representation.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnyOperator {
    Kahler(KahlerMap),
    Complex(ComplexOperator),
}

impl AnyOperator {
    pub fn n(&self) -> usize {
        match self {
            AnyOperator::Kahler(m) => m.n(),
            AnyOperator::Complex(c) => c.n(),
        }
    }

    pub fn to_map(&self) -> KahlerMap {
        match self {
            AnyOperator::Kahler(m) => m.clone(),
            AnyOperator::Complex(c) => lift_operator(c),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            AnyOperator::Kahler(m) => m.to_complex(),
            AnyOperator::Complex(c) => c.matrix().clone(),
        }
    }
}

/// A state in either representation.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnyState {
    Kahler(KahlerVector),
    Complex(ComplexState),
}

impl AnyState {
    pub fn to_kahler(&self) -> KahlerVector {
        match self {
            AnyState::Kahler(v) => v.clone(),
            AnyState::Complex(c) => gamma_inv(c),
        }
    }

    pub fn to_complex(&self) -> ComplexState {
        match self {
            AnyState::Kahler(v) => gamma(v),
            AnyState::Complex(c) => c.clone(),
        }
    }
}

/// `⟨L₁ ⋯ L_k ψ, φ⟩`.
#[derive(Debug, Clone, Deserialize)]
pub struct CorrelationQuery {
    pub operators: Vec<AnyOperator>,
    pub psi: AnyState,
    pub phi: AnyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    /// Real-side value `g(𝓛₁⋯𝓛_k η, ζ) + i ω(𝓛₁⋯𝓛_k η, ζ)`.
    pub value: Complex64,
    /// Same quantity computed in complex arithmetic.
    pub complex_value: Complex64,
    pub residual: f64,
}

/// Evaluates the correlation on both sides and fails unless they agree to
/// `1e-10 · (1 + |value|)`.
pub fn correlation(query: &CorrelationQuery) -> Result<CorrelationResult> {
    let r = evaluate_correlation(query)?;
    let tolerance = Tolerance::new(1e-10, 0.0).threshold(1.0 + r.value.norm());
    if r.residual >= tolerance {
        return Err(KahlerError::ReconstructionMismatch {
            residual: r.residual,
            tolerance,
        });
    }
    Ok(r)
}

/// Both sides of the correlation without the agreement check.
pub fn evaluate_correlation(query: &CorrelationQuery) -> Result<CorrelationResult> {
    if query.operators.is_empty() {
        return Err(KahlerError::EmptyChain);
    }
    let eta = query.psi.to_kahler();
    let zeta = query.phi.to_kahler();
    eta.check_same_dim(&zeta)?;
    if let Some(op) = query.operators.iter().find(|op| op.n() != eta.n()) {
        return Err(KahlerError::DimensionMismatch {
            expected: eta.n(),
            found: op.n(),
        });
    }

    let mut x = eta;
    for op in query.operators.iter().rev() {
        x = op.to_map().apply(&x)?;
    }
    let value = Complex64::new(metric_g(&x, &zeta)?, symplectic_omega(&x, &zeta)?);

    let matrices: Vec<_> = query.operators.iter().map(AnyOperator::to_complex).collect();
    let complex_value = oracle_correlation(&matrices, &query.psi.to_complex(), &query.phi.to_complex())?.value;

    Ok(CorrelationResult {
        value,
        complex_value,
        residual: (value - complex_value).norm(),
    })
}

/// `min_{a,b,c} ‖Φ - c · a ⊗_K b‖` over normalized qubits `a, b` on a
/// `(θ, φ)` grid with `steps` points per axis and the optimal complex `c`.
pub fn product_distance_grid(phi: &KahlerVector, steps: usize) -> Result<f64> {
    if phi.n() != 4 {
        return Err(KahlerError::DimensionMismatch {
            expected: 4,
            found: phi.n(),
        });
    }
    let phi = phi.normalized()?;
    let grid: Vec<KahlerVector> = (0..steps)
        .flat_map(|i| {
            (0..steps).map(move |j| {
                let theta = PI * i as f64 / (steps - 1).max(1) as f64;
                let ph = TAU * j as f64 / steps as f64;
                bloch_state(theta, ph)
            })
        })
        .collect();
    let mut best = 0.0f64;
    for a in &grid {
        for b in &grid {
            let t = tensor_k(a, b);
            let overlap = metric_g(&t, &phi)?.powi(2) + symplectic_omega(&t, &phi)?.powi(2);
            best = best.max(overlap);
        }
    }
    Ok((1.0 - best.min(1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{lift_operator, ComplexOperator};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn sigma_z() -> KahlerOperator {
        lift_operator(&ComplexOperator::pauli_z())
            .into_hermitian(Tolerance::default())
            .unwrap()
    }

    #[test]
    fn plus_state_on_sigma_z() {
        let eta = KahlerVector::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![0.0, 0.0]).unwrap();
        let out = born_probabilities(&eta, &sigma_z()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!((out[0].eigenvalue, out[1].eigenvalue), (-1.0, 1.0));
        for o in &out {
            assert!((o.probability - 0.5).abs() < 1e-15);
            assert_eq!(o.projector_rank, 2);
        }
    }

    #[test]
    fn eigenstate_is_certain() {
        let out = born_probabilities(&KahlerVector::basis_q(2, 0).unwrap(), &sigma_z()).unwrap();
        assert!((out[1].probability - 1.0).abs() < 1e-15);
        assert!(out[0].probability.abs() < 1e-15);
    }

    #[test]
    fn rank_divisor_breaks_normalization() {
        let out = born_probabilities_with(
            &KahlerVector::basis_q(2, 0).unwrap(),
            &sigma_z(),
            BornConvention::RankDivisor,
        )
        .unwrap();
        assert!((out.iter().map(|o| o.probability).sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let eta = KahlerVector::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            born_probabilities(&eta, &sigma_z()),
            Err(KahlerError::NotNormalized { .. })
        ));
    }

    #[test]
    fn bell_statistics() {
        let bell = bell_state();
        assert!((bell.norm() - 1.0).abs() < 1e-15);
        let out = born_probabilities(&bell, &computational_basis_observable(4).unwrap()).unwrap();
        let probs: Vec<f64> = out.iter().map(|o| o.probability).collect();
        for (p, e) in probs.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((p - e).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_conditioning_is_perfectly_correlated() {
        let z1 = lift_operator(&ComplexOperator::pauli_z().kron(&ComplexOperator::identity(2).unwrap()))
            .into_hermitian(Tolerance::default())
            .unwrap();
        let z2 = lift_operator(&ComplexOperator::identity(2).unwrap().kron(&ComplexOperator::pauli_z()))
            .into_hermitian(Tolerance::default())
            .unwrap();
        let bell = bell_state();
        let dec = eigen_structured(&z1).unwrap();
        for i in 0..dec.len() {
            let post = collapse(&bell, &dec, i).unwrap();
            let second = born_probabilities(&post, &z2).unwrap();
            let same = second.iter().find(|o| o.eigenvalue == dec.eigenvalues()[i]).unwrap();
            assert!((same.probability - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bell_is_entangled() {
        let d = product_distance_grid(&bell_state(), 12).unwrap();
        assert!(d > 0.5, "{d}");
        let prod = compose_systems(&bloch_state(PI / 2.0, 0.0), &bloch_state(PI / 4.0, 0.0));
        assert!(product_distance_grid(&prod, 5).unwrap() < 1e-7);
    }

    #[test]
    fn sampler_walks_cumulative_mass() {
        assert_eq!(sample_index(&[0.5, 0.0, 0.0, 0.5], 0.2), Some(0));
        assert_eq!(sample_index(&[0.5, 0.0, 0.0, 0.5], 0.7), Some(3));
        assert_eq!(sample_index(&[0.25, 0.25], 0.6), None);
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(
            bloch_coordinates(&KahlerVector::basis_q(2, 0).unwrap()).unwrap(),
            (0.0, 0.0)
        );
        let plus = KahlerVector::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![0.0, 0.0]).unwrap();
        let (t, p) = bloch_coordinates(&plus).unwrap();
        assert!((t - PI / 2.0).abs() < 1e-15 && p == 0.0);
        let (t, p) = bloch_coordinates(&KahlerVector::basis_p(2, 1).unwrap()).unwrap();
        assert!((t - PI).abs() < 1e-15 && p == 0.0);
        assert!(bloch_coordinates(&KahlerVector::zeros(2).unwrap()).is_err());
        assert!(bloch_coordinates(&KahlerVector::basis_q(3, 0).unwrap()).is_err());
    }

    #[test]
    fn bloch_ignores_global_phase() {
        let eta = bloch_state(1.1, 4.0);
        let rotated = gamma_inv(&gamma(&eta).scaled(Complex64::from_polar(1.0, 2.3)));
        let (t, p) = bloch_coordinates(&rotated).unwrap();
        assert!((t - 1.1).abs() < 1e-12 && (p - 4.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_sigma_x() {
        let query: CorrelationQuery = serde_json::from_str(
            r#"{"operators": [{"re": [[0,1],[1,0]], "im": [[0,0],[0,0]], "kind": "hermitian"}],
                "psi": {"n": 2, "q": [1,0], "p": [0,0]},
                "phi": {"re": [0,1], "im": [0,0]}}"#,
        )
        .unwrap();
        let r = correlation(&query).unwrap();
        assert_eq!(r.value, Complex64::new(1.0, 0.0));
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn correlation_contract() {
        let psi = AnyState::Kahler(KahlerVector::basis_q(2, 0).unwrap());
        let empty = CorrelationQuery {
            operators: vec![],
            psi: psi.clone(),
            phi: psi.clone(),
        };
        assert!(matches!(correlation(&empty), Err(KahlerError::EmptyChain)));
        let bad = CorrelationQuery {
            operators: vec![AnyOperator::Kahler(KahlerMap::identity(3).unwrap())],
            psi: psi.clone(),
            phi: psi,
        };
        assert!(matches!(correlation(&bad), Err(KahlerError::DimensionMismatch { .. })));
    }
}
