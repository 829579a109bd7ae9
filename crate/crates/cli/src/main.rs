mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semigram_core::{Error, GramianStrategy, ModeSelection};

#[derive(Parser, Debug)]
#[command(name = "semigram", version, about = "Semistability analysis, Gramians and invariant model reduction")]
struct Cli {
    /// Absolute singular-value threshold for rank decisions.
    #[arg(long, global = true, value_parser = nonnegative)]
    rank_tol: Option<f64>,

    /// Absolute tolerance for improper-integral quadrature.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    quad_tol: f64,

    /// How the semistability Gramian is computed.
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Directory for matrix and CSV output files.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify semistability and report the kernel and limit projector.
    Analyze { system: PathBuf },
    /// Compute the semistability Gramian P∞.
    Gramian { system: PathBuf },
    /// Truncate to a set of eigenmodes and report the H2 error.
    Reduce {
        system: PathBuf,
        /// `slowest:K`, `all`, or comma-separated mode indices.
        #[arg(long)]
        keep: ModeSelection,
        /// Which H2 error computation to run.
        #[arg(long, value_enum, default_value_t = H2Arg::Gramian)]
        h2: H2Arg,
    },
    /// Heat-equation modal benchmark.
    HeatBench {
        /// Number of kept modes.
        #[arg(long, default_value_t = semigram_core::heat::DEFAULT_KEPT)]
        n: usize,
        /// Number of surrogate modes.
        #[arg(long, default_value_t = semigram_core::heat::DEFAULT_MODES)]
        m: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    Quadrature,
    Lyapunov,
}

impl From<MethodArg> for GramianStrategy {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => GramianStrategy::Auto,
            MethodArg::Quadrature => GramianStrategy::Quadrature,
            MethodArg::Lyapunov => GramianStrategy::Lyapunov,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum H2Arg {
    Gramian,
    Quadrature,
    Both,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub rank_tol: Option<f64>,
    pub quad_tol: f64,
    pub strategy: GramianStrategy,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {v}"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be nonnegative and finite, got {v}"))
    }
}

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_SEMISTABLE: u8 = 3;
const EXIT_SELECTION: u8 = 4;
const EXIT_NUMERICAL: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Dimension { .. }
        | Error::NonFinite { .. }
        | Error::InvalidParameter(_)
        | Error::Parse { .. }
        | Error::Io { .. } => EXIT_INPUT,
        Error::NotSemistable(_) | Error::Precondition(_) => EXIT_NOT_SEMISTABLE,
        Error::InvalidSelection(_) => EXIT_SELECTION,
        Error::Conditioning { .. }
        | Error::Quadrature { .. }
        | Error::Inconsistent { .. }
        | Error::ImaginaryResidue { .. }
        | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::NotSemistable(reason) => format!("not_semistable: {reason}"),
        Error::InvalidSelection(msg) => msg.clone(),
        other => format!("error: {other}"),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("SEMIGRAM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("SEMIGRAM_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    let config = RunConfig {
        rank_tol: cli.rank_tol,
        quad_tol: cli.quad_tol,
        strategy: cli.method.into(),
        format: cli.format,
        output: cli.output,
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Analyze { system } => commands::analyze(&system, &config),
        Command::Gramian { system } => commands::gramian(&system, &config),
        Command::Reduce { system, keep, h2 } => commands::reduce(&system, &keep, h2, &config),
        Command::HeatBench { n, m } => commands::heat_bench(n, m, &config),
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(e) => {
                    eprintln!("{}", describe(&e));
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Err(e) => {
            eprintln!("{}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
