//! `occsim` — experiment runner for random linear network codes on line
//! networks with worst-case schedules. CSV goes to `--out` (or the `out`
//! config key), falling back to stdout.

use clap::{Args, Parser, Subcommand};
use occsim_core::harness::{
    run_bounds, run_capacity, run_rank_experiment, run_simulate, BoundsConfig, CapacityConfig,
    HarnessError, Overrides, RankConfig, RawConfig, SimulateConfig,
};
use occsim_core::network::DeliveryOrder;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "occsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MER/PER sweep of dense/CC/OCC codes over worst-case schedules.
    Simulate(CommonArgs),
    /// Full-rank frequency of banded random binary matrices.
    RankExperiment(CommonArgs),
    /// Tabulate the closed-form performance bounds.
    Bounds(CommonArgs),
    /// Measure per-chunk schedule capacities against the capacity bound.
    Capacity(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed number of trials per cell (overrides the failure target).
    #[arg(long)]
    trials: Option<u64>,
    /// Stop a cell after this many decoding failures.
    #[arg(long)]
    target_failures: Option<u64>,
    /// Hard cap on trials per cell.
    #[arg(long)]
    max_trials: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Carry random payloads of this many bytes and verify decoding.
    #[arg(long)]
    payload_len: Option<usize>,
    /// Let interior nodes draw empty chunks (emitting wasted packets).
    #[arg(long)]
    allow_empty_chunk: bool,
    /// Packet delivery order within each link.
    #[arg(long, value_parser = ["inorder", "permuted"])]
    delivery: Option<String>,
}

impl CommonArgs {
    fn raw(&self) -> Result<RawConfig, HarnessError> {
        match &self.config {
            Some(path) => RawConfig::from_file(path),
            None => Ok(RawConfig::default()),
        }
    }

    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trials: self.trials,
            target_failures: self.target_failures,
            max_trials: self.max_trials,
            workers: self.workers,
            out: self.out.clone(),
            payload_len: self.payload_len,
            allow_empty_chunk: self.allow_empty_chunk,
            delivery: self.delivery.as_deref().map(|d| match d {
                "permuted" => DeliveryOrder::RandomPermutation,
                _ => DeliveryOrder::InOrder,
            }),
        }
    }
}

fn emit(csv: &str, out: Option<&PathBuf>) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, csv).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Simulate(args) => {
            let cfg = SimulateConfig::from_raw(args.raw()?, &args.overrides())?;
            emit(&run_simulate(&cfg)?, cfg.out.as_ref())
        }
        Command::RankExperiment(args) => {
            let cfg = RankConfig::from_raw(args.raw()?, &args.overrides())?;
            emit(&run_rank_experiment(&cfg)?, cfg.out.as_ref())
        }
        Command::Bounds(args) => {
            let cfg = BoundsConfig::from_raw(args.raw()?, &args.overrides())?;
            emit(&run_bounds(&cfg)?, cfg.out.as_ref())
        }
        Command::Capacity(args) => {
            let cfg = CapacityConfig::from_raw(args.raw()?, &args.overrides())?;
            emit(&run_capacity(&cfg)?, cfg.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
