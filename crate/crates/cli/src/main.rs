//! `ruin`: ruin tables, published-table reproduction, Monte Carlo checks and
//! net profit classification for three-season risk models.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ruin_core::{NumericMode, RuinError};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "ruin", version, about = "Ruin probabilities for discrete-time risk models with seasonal claims")]
#[command(after_help = "Exit codes: 0 ok, 1 I/O, 2 usage, 3 model parse, 4 solver, 5 golden mismatch, 6 oracle disagreement.\n\
RUIN_NUM_THREADS caps worker threads for simulation (0 or unset = all cores).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ruin table with rows T = 1..t-max and a final ultimate ("inf") row.
    Compute(ComputeArgs),
    /// Rebuild the three published tables and diff them against the stored values.
    Tables(TablesArgs),
    /// Compare seeded Monte Carlo estimates against the finite-time recursion.
    McCheck(McCheckArgs),
    /// Net profit class, E S, solver branch and leading aggregate atom.
    Classify(ClassifyArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model file in JSON.
    #[arg(long, value_name = "PATH", required_unless_present = "builtin", conflicts_with = "builtin")]
    model: Option<PathBuf>,
    /// Built-in model: first, poisson or geometric.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Numeric mode; overrides the mode in the model file.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Float,
    Exact,
}

impl From<Mode> for NumericMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Float => NumericMode::Float,
            Mode::Exact => NumericMode::Exact,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Pretty,
    Json,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Largest initial surplus.
    #[arg(long, default_value_t = 20)]
    u_max: usize,
    /// Largest finite horizon (at least 1).
    #[arg(long, default_value_t = 20)]
    t_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Ultimate solver: branch, generic or homogeneous.
    #[arg(long, default_value = "branch")]
    solver: String,
    /// Finite-time method: recursion, enumeration or monte-carlo.
    #[arg(long, default_value = "recursion")]
    method: String,
    /// Season of the first claim (0-based).
    #[arg(long, default_value_t = 0)]
    start_season: usize,
    /// Far-field boundary: "adaptive" or a fixed index N.
    #[arg(long, default_value = "adaptive")]
    boundary: String,
    /// Stay in double precision and fail instead of widening.
    #[arg(long)]
    no_escalation: bool,
    /// Use the case formulas exactly as published.
    #[arg(long)]
    printed_formulas: bool,
    /// Paths for the monte-carlo method.
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    /// Seed for the monte-carlo method.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct TablesArgs {
    /// Directory for table1.csv, table2.csv and table3.csv.
    #[arg(long, value_name = "DIR", default_value = "tables")]
    out_dir: PathBuf,
    /// Directory with replacement golden files of the same names.
    #[arg(long, value_name = "DIR")]
    golden: Option<PathBuf>,
    /// Ultimate solver for the inf rows.
    #[arg(long, default_value = "branch")]
    solver: String,
}

#[derive(Args)]
struct McCheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Initial surpluses of the grid.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,5")]
    us: Vec<usize>,
    /// Horizons of the grid.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20")]
    horizons: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    start_season: usize,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    GoldenMismatch(String),
    #[error("{0}")]
    OracleDisagreement(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Solver(_) => 4,
            Failure::GoldenMismatch(_) => 5,
            Failure::OracleDisagreement(_) => 6,
        }
    }
}

impl From<RuinError> for Failure {
    fn from(e: RuinError) -> Self {
        let msg = e.to_string();
        match e {
            RuinError::Parse(_)
            | RuinError::EmptyWeights
            | RuinError::NegativeWeight { .. }
            | RuinError::ZeroTotal
            | RuinError::ExactModeUnsupported { .. } => Failure::Parse(msg),
            RuinError::InvalidParameter(_) | RuinError::InvalidSeasonIndex { .. } | RuinError::UnknownStrategy { .. } => {
                Failure::Usage(msg)
            }
            _ => Failure::Solver(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("RUIN_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("RUIN_NUM_THREADS must be a non-negative integer, got '{value}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Tables(a) => commands::tables(a),
        Command::McCheck(a) => commands::mc_check(a),
        Command::Classify(a) => commands::classify(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
