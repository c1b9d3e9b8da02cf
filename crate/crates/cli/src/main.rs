//! `flrank`: generate comparison data, rank items, evaluate rankings and run
//! sample-complexity sweeps.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 solver failure.

mod commands;
mod data;
mod error;
mod sizes;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "flrank", version, about = "Feature-aware ranking from pairwise comparisons")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Global {
    /// Seed for all random draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for sweeps; defaults to available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,
    /// Leave wall-clock times out of reports so outputs are byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its ground-truth preference matrix.
    Generate(commands::GenerateArgs),
    /// Rank the items of a dataset.
    Rank(commands::RankArgs),
    /// Disagreement of a ranking with a ground-truth preference matrix.
    Eval(commands::EvalArgs),
    /// Run a parameter sweep and write a metrics CSV.
    Sweep(sweep::SweepArgs),
    /// Report sample-size requirements and noise levels for a dataset.
    Diagnose(commands::DiagnoseArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(args) => commands::generate(args, &cli.global),
        Command::Rank(args) => commands::rank(args, &cli.global),
        Command::Eval(args) => commands::eval(args),
        Command::Sweep(args) => sweep::sweep(args, &cli.global),
        Command::Diagnose(args) => commands::diagnose_cmd(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.global.log_level).format_timestamp(None).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
