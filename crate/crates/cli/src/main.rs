//! Command-line driver: wires JSON configs to the simulator and experiment
//! pipelines, owns the output files and the process exit codes.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "igr",
    about = "Ion-gating reservoir simulator: device traces, benchmark tasks, Lyapunov analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent runs (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one device through a pulse program and export the trace.
    Simulate(CommonArgs),
    /// NARMA2 benchmark: simulate, fit the ridge readout, report NMSE.
    Narma2(CommonArgs),
    /// Second-order nonlinear dynamic equation benchmark.
    SecondOrder(CommonArgs),
    /// Handwritten-digit recognition through the simulated pattern table.
    Mnist {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory with the four MNIST IDX files
        /// (falls back to $IGR_MNIST_DIR, then data/mnist).
        #[arg(long)]
        mnist_dir: Option<PathBuf>,
    },
    /// Lyapunov spectrum of the reservoir under a triangular drive.
    Lyapunov(CommonArgs),
    /// Operating-condition grid: test NMSE per (period, duty) cell.
    Sweep(CommonArgs),
    /// Per-virtual-node readout quality (physical nodes only).
    Ablation(CommonArgs),
}

/// Errors split by exit code: 1 for configuration problems, 2 for failures
/// during the run.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        Self::Config(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Simulate(c)
        | Command::Narma2(c)
        | Command::SecondOrder(c)
        | Command::Lyapunov(c)
        | Command::Sweep(c)
        | Command::Ablation(c) => c,
        Command::Mnist { common, .. } => common,
    };
    if let Some(jobs) = common.jobs {
        // Ignore rebuild errors: the pool can only be configured once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    let result = match cli.command {
        Command::Simulate(c) => commands::simulate(&c),
        Command::Narma2(c) => commands::series(&c, igr_core::tasks::TaskKind::Narma2),
        Command::SecondOrder(c) => commands::series(&c, igr_core::tasks::TaskKind::SecondOrder),
        Command::Mnist { common, mnist_dir } => commands::mnist(&common, mnist_dir.as_deref()),
        Command::Lyapunov(c) => commands::lyapunov(&c),
        Command::Sweep(c) => commands::sweep(&c),
        Command::Ablation(c) => commands::ablation(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(2)
        }
    }
}
