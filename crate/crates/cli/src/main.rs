//! `isoweyl` — curvature, classification and identity checks for binary metrics.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage/parse/spec
//! error, 3 numerical domain error.

mod commands;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isoweyl_core::sampling::SamplePlan;

use crate::commands::{CliError, Outcome};

#[derive(Parser)]
#[command(name = "isoweyl", version, about = "Curvature and Weyl-tensor verification for 4D binary metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// One `RESULT key=value …` line per record
    #[arg(long, global = true)]
    machine: bool,
}

#[derive(Args)]
struct Sampling {
    /// Number of admissible sample points
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Normalized residual tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl Sampling {
    fn plan(&self) -> SamplePlan {
        SamplePlan::new(self.samples, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Metric, Ricci, scalar, Riemann and Weyl components at one point
    Curvature {
        spec: PathBuf,
        /// a,b,c,d (rational or decimal)
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Exact rational arithmetic
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Signature, Lemma case, conformal flatness, C^k_ikj = 0 and Petrov tag
    Classify {
        spec: PathBuf,
        /// Reference point for the Petrov tag (default: first sample)
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Exact randomized check of a closed-form identity
    Verify {
        identity: String,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<String>,
        /// Number of random rational points
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Accepted for symmetry with `curvature`; identities are always checked exactly
        #[arg(long)]
        exact: bool,
        /// Perturb one coefficient of the closed form (bracket, detM)
        #[arg(long)]
        mutate: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Conformal flatness, or with --riemann full flatness, at sampled points
    Flatness {
        spec: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Check riemann_norm instead of the Weyl residual
        #[arg(long)]
        riemann: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Signature and curvature residuals over a grid of the spec's domain
    Scan {
        spec: PathBuf,
        /// n1,n2,n3,n4 points per axis
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        output: Output,
    },
}

fn run(command: Command) -> (Result<Outcome, CliError>, bool) {
    match command {
        Command::Curvature {
            spec,
            point,
            exact,
            output,
        } => (commands::curvature_cmd(&spec, &point, exact), output.machine),
        Command::Classify {
            spec,
            point,
            sampling,
            output,
        } => (
            commands::classify_cmd(&spec, point.as_deref(), &sampling.plan(), sampling.tol),
            output.machine,
        ),
        Command::Verify {
            identity,
            m,
            points,
            seed,
            exact: _,
            mutate,
            output,
        } => (
            commands::verify_cmd(&identity, m.as_deref(), points, seed, mutate),
            output.machine,
        ),
        Command::Flatness {
            spec,
            sampling,
            riemann,
            output,
        } => (
            commands::flatness_cmd(&spec, &sampling.plan(), sampling.tol, riemann),
            output.machine,
        ),
        Command::Scan { spec, grid, output } => (commands::scan_cmd(&spec, &grid), output.machine),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, machine) = run(cli.command);
    match result {
        Ok(outcome) => {
            let text = report::render(&outcome.rows, machine);
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
