mod commands;
mod pgm;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use persistency::model::Family;
use persistency::persist::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "persistency",
    version,
    about = "Partial optimality for pairwise energy minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random 4-connected grid model as UAI plus a JSON sidecar.
    Gen(GenArgs),
    /// Run TRW-S and print the labeling, its energy and the lower bound.
    Solve(SolveArgs),
    /// Compute an improving substitution and write the JSON report.
    Persist(PersistArgs),
    /// Aggregate several persistency reports.
    Stats(StatsArgs),
    /// Render remaining-label maps of a grid report as PGM images.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value = "potts")]
    family: Family,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = 3)]
    labels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    cost_min: i64,
    #[arg(long, default_value_t = 100, allow_negative_numbers = true)]
    cost_max: i64,
    /// Output model; the sidecar goes next to it with a `.json` extension.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    model: PathBuf,
    /// Maximum number of TRW-S sweeps.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PersistArgs {
    model: PathBuf,
    /// Test labeling as a JSON array; chosen automatically when absent.
    #[arg(long)]
    labeling: Option<PathBuf>,
    #[arg(long, default_value = "budgeted")]
    mode: Mode,
    #[arg(long, default_value_t = 50)]
    sweeps_per_round: usize,
    /// Sweeps used to pick the test labeling.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    /// Accepted for symmetry with `gen`; every driver is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_outer_rounds: Option<usize>,
    #[arg(long)]
    no_single_node: bool,
    #[arg(long)]
    no_pruning_cut: bool,
    #[arg(long)]
    naive_messages: bool,
    /// Write the model restricted to the remaining labels as UAI.
    #[arg(long)]
    emit_remainder: Option<PathBuf>,
    /// Write one JSON object per round and per sweep.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    report: PathBuf,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Writes `<prefix>.remaining.pgm` and `<prefix>.unique.pgm`.
    #[arg(short, long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PERSIST_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Persist(a) => commands::persist(a),
        Command::Stats(a) => commands::stats(a),
        Command::Render(a) => commands::render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
