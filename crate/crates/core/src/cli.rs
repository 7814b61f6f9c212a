//! Drivers behind the `kahler` subcommands. Each returns the JSON document to
//! emit and whether the run counts as a success.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::bench::run_bench;
use crate::groups::check_memberships;
use crate::matrix_json::{from_rows, to_rows};
use crate::operator::KahlerOperator;
use crate::quantum::{correlation, simulate_bell, AnyOperator, BornConvention, ComplexJson, CorrelationQuery};
use crate::spectral::{eigen_closed_form_n2, eigen_dense, eigen_structured};
use crate::verify::{run, Suite, VerifyOptions};
use crate::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Structured,
    ClosedForm,
    Dense,
}

impl std::str::FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "structured" => Method::Structured,
            "closed-form" => Method::ClosedForm,
            "dense" => Method::Dense,
            _ => bail!("unknown method '{s}' (expected structured, closed-form or dense)"),
        })
    }
}

pub struct Output {
    pub json: String,
    pub passed: bool,
}

impl Output {
    fn ok<T: Serialize>(value: &T) -> anyhow::Result<Self> {
        Ok(Self {
            json: serde_json::to_string_pretty(value)?,
            passed: true,
        })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn verify(suite: &str, opts: &VerifyOptions) -> anyhow::Result<Output> {
    let Ok(suite) = suite.parse::<Suite>() else {
        let names: Vec<&str> = Suite::INDIVIDUAL
            .iter()
            .chain([Suite::All].iter())
            .map(|s| s.name())
            .collect();
        bail!("unknown suite '{suite}' (expected one of {})", names.join(", "));
    };
    let report = run(suite, opts)?;
    Ok(Output {
        json: report.to_json(),
        passed: report.passed,
    })
}

#[derive(Debug, Serialize)]
pub struct SpectralOutput {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub projectors: Vec<Vec<Vec<f64>>>,
}

/// Accepts `{"n", "S", "A"}` or a complex `{"re", "im"}` operator.
pub fn spectral(input: &Path, method: Method) -> anyhow::Result<Output> {
    let raw: AnyOperator = read_json(input)?;
    let op = KahlerOperator::from_map(raw.to_map(), Tolerance::default())?;
    let dec = match method {
        Method::Structured => eigen_structured(&op)?,
        Method::ClosedForm => eigen_closed_form_n2(&op)?,
        Method::Dense => eigen_dense(&op)?,
    };
    Output::ok(&SpectralOutput {
        eigenvalues: dec.eigenvalues().to_vec(),
        multiplicities: dec.multiplicities(),
        projectors: dec.projectors().iter().map(to_rows).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct CorrelateOutput {
    pub value: ComplexJson,
    pub residual: f64,
}

pub fn correlate(query: &Path) -> anyhow::Result<Output> {
    let q: CorrelationQuery = read_json(query)?;
    let r = correlation(&q)?;
    Output::ok(&CorrelateOutput {
        value: r.value.into(),
        residual: r.residual,
    })
}

pub fn simulate(shots: u64, seed: u64, convention: BornConvention) -> anyhow::Result<Output> {
    Output::ok(&simulate_bell(shots, seed, convention)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Rows(Vec<Vec<f64>>),
    Wrapped { matrix: Vec<Vec<f64>> },
}

/// Accepts bare rows or `{"matrix": rows}`.
pub fn group_check(input: &Path) -> anyhow::Result<Output> {
    let rows = match read_json::<MatrixInput>(input)? {
        MatrixInput::Rows(r) | MatrixInput::Wrapped { matrix: r } => r,
    };
    Output::ok(&check_memberships(&from_rows(&rows)?)?)
}

pub fn bench(dims: &[usize], trials: usize, seed: u64) -> anyhow::Result<Output> {
    let records = run_bench(dims, trials, seed)?;
    let passed = records.iter().all(|r| r.residual < 1e-9);
    Ok(Output {
        json: serde_json::to_string_pretty(&records)?,
        passed,
    })
}
