//! Wall-clock comparison of the structured and dense eigensolvers.

use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::operator::KahlerOperator;
use crate::random;
use crate::spectral::{eigen_dense, eigen_structured, SpectralDecomposition};

const BENCH_SUITE: u32 = 0x800;

type Solver = fn(&KahlerOperator) -> Result<SpectralDecomposition>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub method: String,
    /// Mean seconds per decomposition.
    pub wall_time_s: f64,
    /// Worst `‖𝓛v − λv‖ / ‖𝓛‖` over all instances.
    pub residual: f64,
}

/// Times both routes on the same `trials` operators for every `n` in `dims`.
pub fn run_bench(dims: &[usize], trials: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::with_capacity(2 * dims.len());
    for (d, &n) in dims.iter().enumerate() {
        let ops: Vec<KahlerOperator> = (0..trials)
            .map(|t| {
                let mut rng = random::trial_rng(seed, BENCH_SUITE, (d * trials + t) as u32);
                random::k_hermitian(&mut rng, n)
            })
            .collect();
        let routes: [(&str, Solver); 2] = [("structured", eigen_structured), ("dense", eigen_dense)];
        for (method, solve) in routes {
            let mut elapsed = 0.0;
            let mut residual = 0.0f64;
            for op in &ops {
                let start = Instant::now();
                let dec = solve(op)?;
                elapsed += start.elapsed().as_secs_f64();
                residual = residual.max(dec.max_eigen_residual(op) / op.norm().max(f64::MIN_POSITIVE));
            }
            out.push(BenchRecord {
                n,
                method: method.into(),
                wall_time_s: if trials == 0 { 0.0 } else { elapsed / trials as f64 },
                residual,
            });
        }
    }
    Ok(out)
}
