//! Quantum mechanics over real Kähler spaces K^{2n}, checked against a
//! complex Hilbert-space reference implementation.
//!
//! A state is a pair of real vectors `(q, p)`; observables are real symmetric
//! matrices commuting with the complex structure `J`. The [`correspondence`]
//! module maps everything to and from `C^n`, and [`oracle`] recomputes each
//! quantity directly in complex arithmetic so the two sides can be compared.

pub mod bench;
pub mod cli;
pub mod correspondence;
pub mod error;
pub mod groups;
pub mod kahler;
pub mod matrix_json;
pub mod operator;
pub mod oracle;
pub mod quantum;
pub mod random;
pub mod spectral;
pub mod tensor;
pub mod verify;

pub use correspondence::{
    complex_inner, gamma, gamma_inv, lift_operator, lower_map, lower_operator, ComplexOperator, ComplexState,
    OperatorKind,
};
pub use error::{KahlerError, Result};
pub use kahler::{apply_j, j_matrix, metric_g, symplectic_omega, ComplexStructure, KahlerVector, Tolerance};
pub use operator::{KahlerMap, KahlerOperator};
pub use spectral::SpectralDecomposition;
