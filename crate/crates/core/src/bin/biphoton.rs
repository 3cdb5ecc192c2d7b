//! Command-line front end: one config file per run, flags only for paths,
//! seed and verbosity.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use biphoton::cli::{self, RunOptions};
use biphoton::config::Command as RunCommand;

#[derive(Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Joint spectra, Hong-Ou-Mandel traces, mode decompositions and fits for down-conversion photon pairs"
)]
struct Args {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output artifacts.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Seed for stochastic steps (fit restarts).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chattier progress output.
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Build the joint spectrum and sweep the coincidence trace.
    Simulate(CommonArgs),
    /// Project onto Hermite modes, Schmidt-decompose, report singlet overlap.
    Decompose(CommonArgs),
    /// Apply the p > 1/2 entanglement witness to a trace.
    Witness(CommonArgs),
    /// Fit the analytic trace model to measured or synthetic data.
    Fit(CommonArgs),
    /// Compare the true-sinc process against the displaced-Gaussian stand-in.
    Discriminate(CommonArgs),
    /// Check a config file and list every problem found.
    Validate {
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
    },
}

fn options(common: &CommonArgs) -> RunOptions {
    RunOptions {
        config_path: common.config.clone(),
        out_dir: common.out_dir.clone(),
        seed: common.seed,
        verbose: common.verbose,
    }
}

fn main() -> ExitCode {
    // single-threaded BLAS keeps decomposition output byte-reproducible
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    let args = Args::parse();
    let outcome = match &args.command {
        CliCommand::Simulate(c) => cli::run(RunCommand::Simulate, &options(c)),
        CliCommand::Decompose(c) => cli::run(RunCommand::Decompose, &options(c)),
        CliCommand::Witness(c) => cli::run(RunCommand::Witness, &options(c)),
        CliCommand::Fit(c) => cli::run(RunCommand::Fit, &options(c)),
        CliCommand::Discriminate(c) => cli::run(RunCommand::Discriminate, &options(c)),
        CliCommand::Validate { config } => {
            return match cli::validate_config(config) {
                Ok(code) => ExitCode::from(code as u8),
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
    };
    match outcome {
        Ok(artifacts) => {
            for path in artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
