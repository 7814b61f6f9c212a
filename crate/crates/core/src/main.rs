use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use kahler::cli::{self, Method, Output};
use kahler::quantum::BornConvention;
use kahler::verify::VerifyOptions;

#[derive(Parser)]
#[command(name = "kahler", version, about = "Quantum mechanics on real Kähler spaces")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded verification suite and emit its report.
    Verify {
        #[arg(long)]
        suite: String,
        /// Comma-separated dimensions n.
        #[arg(long, value_parser = parse_dims)]
        dims: Option<Dims>,
        /// Trials per dimension.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides every residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Divide Born probabilities by the projector rank.
        #[arg(long)]
        born_rank_divisor: bool,
    },
    /// Decompose an operator read from JSON.
    Spectral {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "structured")]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a correlation query on both sides.
    Correlate {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Simulate {
        #[command(subcommand)]
        what: Simulation,
    },
    Group {
        #[command(subcommand)]
        what: GroupCommand,
    },
    /// Time the structured and dense eigensolvers.
    Bench {
        #[arg(long, value_parser = parse_dims, default_value = "2,4,8,16,32,64")]
        dims: Dims,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Simulation {
    /// Sample the Bell state in the computational basis.
    Bell {
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        born_rank_divisor: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GroupCommand {
    /// Report the group memberships of a real matrix.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type Dims = Vec<usize>;

/// Comma-separated list; the empty string is the empty list.
fn parse_dims(s: &str) -> Result<Dims, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|e| format!("bad dimension '{t}': {e}")))
        .collect()
}

fn convention(rank_divisor: bool) -> BornConvention {
    if rank_divisor {
        BornConvention::RankDivisor
    } else {
        BornConvention::Normalized
    }
}

fn dispatch(command: Command) -> anyhow::Result<(Output, Option<PathBuf>)> {
    Ok(match command {
        Command::Verify {
            suite,
            dims,
            trials,
            seed,
            tol,
            out,
            born_rank_divisor,
        } => {
            let opts = VerifyOptions {
                seed,
                trials,
                dims,
                tol,
                born: convention(born_rank_divisor),
            };
            (cli::verify(&suite, &opts)?, out)
        }
        Command::Spectral { input, method, out } => (cli::spectral(&input, method)?, out),
        Command::Correlate { query, out } => (cli::correlate(&query)?, out),
        Command::Simulate {
            what:
                Simulation::Bell {
                    shots,
                    seed,
                    born_rank_divisor,
                    out,
                },
        } => (cli::simulate(shots, seed, convention(born_rank_divisor))?, out),
        Command::Group {
            what: GroupCommand::Check { input, out },
        } => (cli::group_check(&input)?, out),
        Command::Bench {
            dims,
            trials,
            seed,
            out,
        } => (cli::bench(&dims, trials, seed)?, out),
    })
}

fn emit(json: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")).with_context(|| format!("writing {}", path.display())),
        None => match writeln!(std::io::stdout().lock(), "{json}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = dispatch(args.command).and_then(|(output, out)| {
        emit(&output.json, out.as_deref())?;
        Ok(output.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
