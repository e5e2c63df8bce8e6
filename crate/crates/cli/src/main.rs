//! Command-line front end: reproducible data generation, training, transfer,
//! hyperparameter search, benchmarking, robustness studies, and statistics.
//!
//! Every command is a pure function of its flags, config file, input files,
//! and root seed; reruns produce byte-identical reports. Each run writes a
//! `config-resolved.json` holding every value actually used (experiment
//! parameters only — the output directory is plumbing, not an experiment
//! parameter), and `--from-config` reproduces a run from that file alone.

mod cmd;
mod common;

use std::path::PathBuf;

use clap::{error::ErrorKind, Parser, Subcommand};

use common::{load_config_value, Ctx};

/// Small-data regression with adaptively blended physics residuals,
/// transfer learning, kernel baselines, and an evaluation harness.
///
/// Precedence for every setting: command-line flag, then config file
/// (--config / --from-config), then built-in default. The root seed also
/// falls back to the ADAPTIVE_PINN_SEED environment variable.
#[derive(Parser)]
#[command(name = "adaptive-pinn", version, about, long_about)]
struct Cli {
    /// Root random seed (flag > config > ADAPTIVE_PINN_SEED > 0)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for all report files
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Reproduce a run from its config-resolved.json
    #[arg(long, global = true, conflicts_with = "config")]
    from_config: Option<PathBuf>,

    /// Cap on worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV
    GenData(cmd::gen_data::Args),
    /// Train a network (data-only or physics-blended) and emit its traces
    Train(cmd::train::Args),
    /// Fine-tune a trained checkpoint on new data, or sweep frozen layers
    Transfer(cmd::transfer::Args),
    /// Search training hyperparameters (random, Bayesian, or genetic)
    Hyperopt(cmd::hyperopt::Args),
    /// Compare all six model families on a source/target dataset pair
    Benchmark(cmd::benchmark::Args),
    /// Monte Carlo robustness study over repeated random splits
    McValidate(cmd::mc_validate::Args),
    /// Rank-sum test, density estimates, and blending-weight histogram
    Stats(cmd::stats::Args),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            std::process::exit(1);
        }
        // Ignore the error if a pool already exists (only possible in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config_path = cli.config.as_deref().or(cli.from_config.as_deref());
    let config = match load_config_value(config_path) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    };
    let ctx = Ctx {
        out: cli.out,
        seed_flag: cli.seed,
        config,
    };
    let result = match &cli.command {
        Command::GenData(args) => cmd::gen_data::run(args, &ctx),
        Command::Train(args) => cmd::train::run(args, &ctx),
        Command::Transfer(args) => cmd::transfer::run(args, &ctx),
        Command::Hyperopt(args) => cmd::hyperopt::run(args, &ctx),
        Command::Benchmark(args) => cmd::benchmark::run(args, &ctx),
        Command::McValidate(args) => cmd::mc_validate::run(args, &ctx),
        Command::Stats(args) => cmd::stats::run(args, &ctx),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
