//! `detmax-lab`: instance generators, solver and reduction dispatch, and
//! named verification suites over `detmax-core`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 validation error
//! (malformed input, violated invariant, unknown selector), 3 resource
//! refusal.

pub mod config;
pub mod gen;
pub mod io;
pub mod oracle;
pub mod reduce;
pub mod solve;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{parse_eps, resolve_max_bits, resolve_max_subsets, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<detmax_core::Error> for CliError {
    fn from(e: detmax_core::Error) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "detmax-lab", version, about = "Exact-rational determinant maximization lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Upper bound on enumerated subsets or search states.
    #[arg(long, global = true)]
    pub max_subsets: Option<u64>,
    /// Upper bound on precision bit lengths (default from DETMAX_LAB_MAX_BITS, else 4096).
    #[arg(long, global = true)]
    pub max_bits: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file.
    Solve {
        /// brute | greedy | additive | ortho | ortho-nonneg | grid-exact | grid-block | bcsp-exact
        #[arg(long)]
        alg: String,
        #[arg(long)]
        k: Option<usize>,
        /// Rational precision such as 1/4.
        #[arg(long)]
        eps: Option<String>,
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a reduction to an instance file.
    Reduce {
        /// ksum | gridtiling | bcsp
        #[arg(long)]
        from: String,
        /// arrowhead | orthovectors | detmax | gridtiling
        #[arg(long)]
        to: String,
        /// Diagonal cells for bcsp -> gridtiling: equality | unrestricted
        #[arg(long, default_value = "equality")]
        diagonal: String,
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named verification suite.
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate an instance.
    Gen {
        /// ksum | ksum-planted | gridtiling | gridtiling-planted | bcsp | bcsp-planted | vectors | gram
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Largest integer value (k-Sum) or entry denominator (vectors).
        #[arg(long)]
        max_value: Option<u64>,
        /// Largest cell or relation size before planting.
        #[arg(long)]
        cell_size: Option<usize>,
        /// Named fixture: fig1 (vectors, gram) or table1 (gridtiling).
        #[arg(long)]
        fixture: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn config(command: &str, selector: Option<String>, k: Option<usize>, eps: Option<&str>, trials: Option<usize>, common: &Common) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        command: command.into(),
        selector,
        k,
        eps: eps.map(parse_eps).transpose()?,
        trials,
        seed: common.seed,
        max_subsets: resolve_max_subsets(common.max_subsets)?,
        max_bits: resolve_max_bits(common.max_bits)?,
    })
}

/// Parse arguments and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { alg, k, eps, input, common } => {
            let cfg = config("solve", Some(alg), k, eps.as_deref(), None, &common)?;
            let doc = io::read_document(&input)?;
            let out = solve::solve(&cfg, &doc)?;
            io::write_json(common.output.as_deref(), &out)
        }
        Command::Reduce { from, to, diagonal, input, common } => {
            let cfg = config("reduce", Some(format!("{from}->{to}")), None, None, None, &common)?;
            let doc = io::read_document(&input)?;
            let out = reduce::reduce(&cfg, &from, &to, &diagonal, &doc)?;
            io::write_json(common.output.as_deref(), &out)
        }
        Command::Verify { suite, trials, common } => {
            let cfg = config("verify", Some(suite.clone()), None, None, trials, &common)?;
            let report = suites::run_suite(&suite, &cfg)?;
            io::write_json(common.output.as_deref(), &report)?;
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(format!(
                    "{} of {} trials failed in suite {suite}",
                    report.failures.len(),
                    report.trials
                )))
            }
        }
        Command::Gen { kind, n, k, d, max_value, cell_size, fixture, common } => {
            let cfg = config("gen", Some(kind.clone()), k, None, None, &common)?;
            let params = gen::GenParams { n, k, d, max_value, cell_size, fixture };
            let doc = gen::generate(&kind, &params, &cfg)?;
            io::write_json(common.output.as_deref(), &doc)
        }
    }
}
