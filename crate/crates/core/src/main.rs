use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ppscore::catalog::list_catalog;
use ppscore::config::ExperimentConfig;
use ppscore::error::{Error, Result};
use ppscore::runner;

/// Scoring and Diebold-Mariano evaluation of point process forecasts.
#[derive(Debug, Parser)]
#[command(name = "ppscore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file and write CSV outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `experiment.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `experiment.repetitions`.
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory, created if missing.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; all cores when omitted. Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the forecast catalog and the available data models.
    ListCatalog,
}

fn run(
    config: PathBuf,
    seed: Option<u64>,
    reps: Option<usize>,
    out: PathBuf,
    threads: Option<usize>,
) -> Result<String> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(reps) = reps {
        if reps == 0 {
            return Err(Error::config(&config, "--reps must be positive"));
        }
        cfg.repetitions = reps;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        if k == 0 {
            return Err(Error::config(&config, "--threads must be positive"));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?;
    pool.install(|| runner::run(&cfg, &out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListCatalog => {
            print!("{}", list_catalog());
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, reps, out, threads } => match run(config, seed, reps, out, threads) {
            Ok(summary) => {
                print!("{summary}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
