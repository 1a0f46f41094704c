//! `qms`: analysis of finite-dimensional quantum Markov semigroups.
//!
//! Exit codes: 0 success (or property holds), 1 property does not hold,
//! 2 invalid input, 3 internal inconsistency or numerical failure.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qms_core::ToleranceOverrides;

use crate::input::Failure;

#[derive(Parser, Debug)]
#[command(name = "qms", version, about = "Analyze quantum Markov semigroups in GKSL form")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,

    /// Increase log verbosity on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct TolArgs {
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long = "tol-rank", env = "QMS_TOL_RANK", global = true)]
    rank: Option<f64>,
    /// Relative eigenvalue floor for positivity.
    #[arg(long = "tol-psd", env = "QMS_TOL_PSD", global = true)]
    psd: Option<f64>,
    /// Allowed deviation of a trace from one.
    #[arg(long = "tol-trace", env = "QMS_TOL_TRACE", global = true)]
    trace: Option<f64>,
    /// Entrywise equality threshold.
    #[arg(long = "tol-eq", env = "QMS_TOL_EQ", global = true)]
    eq: Option<f64>,
    /// Real-part cutoff for the imaginary axis.
    #[arg(long = "tol-spec", env = "QMS_TOL_SPEC", global = true)]
    spec: Option<f64>,
}

impl TolArgs {
    fn overrides(self) -> ToleranceOverrides {
        ToleranceOverrides {
            rank: self.rank,
            psd: self.psd,
            trace: self.trace,
            eq: self.eq,
            spec: self.spec,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full analysis battery and report every verdict.
    Analyze {
        /// Model file or fixture name (AD2, DP2, U2, BD<n>).
        model: String,
        /// Write the JSON report to a file, or to stdout when no path is given.
        #[arg(long, num_args = 0..=1, default_missing_value = "-", value_name = "PATH")]
        json: Option<PathBuf>,
        /// Seed of the random certificate vectors.
        #[arg(long, default_value_t = qms_core::analysis::DEFAULT_CERTIFICATE_SEED)]
        seed: u64,
    },
    /// Decide one property; exit 0 if it holds and 1 if it does not.
    Check {
        model: String,
        /// irreducible, primitive, positivity-improving, peripheral or subharmonic.
        #[arg(long)]
        property: String,
        /// Projection file, required for `subharmonic`.
        #[arg(long = "p", value_name = "PROJ")]
        projection: Option<PathBuf>,
        /// Vector file; restricts `positivity-improving` to this vector.
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Print the verdict as JSON instead of a single line.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = qms_core::analysis::DEFAULT_CERTIFICATE_SEED)]
        seed: u64,
    },
    /// Print the invariant density and the invariant kernel dimension.
    Steady { model: String },
    /// Evolve a density over a time grid and write a CSV profile.
    Evolve {
        model: String,
        /// Density file.
        #[arg(long)]
        state: PathBuf,
        /// `t0:t1:steps`, with `steps` equal intervals.
        #[arg(long)]
        grid: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare the algebraic support of T_t(|ψ⟩⟨ψ|) with the numerical oracle.
    Support {
        model: String,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long, default_value_t = qms_core::scan::SUPPORT_TIME)]
        t: f64,
    },
    /// Cross-check the equivalent verdicts on seeded random models.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include per-instance outcomes in the output.
        #[arg(long)]
        instances: bool,
    },
    /// Print a fixture in the model JSON schema.
    DumpFixture { name: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("QMS_LOG")
        .target(env_logger::Target::Stderr)
        .init();

    let overrides = cli.tol.overrides();
    let result = match cli.command {
        Command::Analyze { model, json, seed } => commands::analyze(&model, json.as_deref(), seed, &overrides),
        Command::Check { model, property, projection, psi, json, seed } => commands::check(
            &model,
            &property,
            projection.as_deref(),
            psi.as_deref(),
            json,
            seed,
            &overrides,
        ),
        Command::Steady { model } => commands::steady(&model, &overrides),
        Command::Evolve { model, state, grid, csv } => {
            commands::evolve(&model, &state, &grid, csv.as_deref(), &overrides)
        }
        Command::Support { model, psi, t } => commands::support(&model, &psi, t, &overrides),
        Command::Scan { n, k, count, seed, instances } => commands::scan(n, k, count, seed, instances, &overrides),
        Command::DumpFixture { name } => commands::dump_fixture(&name),
    };
    match result {
        Ok(code) => code.into(),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code.into()
        }
    }
}
