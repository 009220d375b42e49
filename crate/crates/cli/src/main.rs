//! Command-line interface for open category detection.
//!
//! Subcommands cover the full workflow: closed-form sample-size bounds,
//! synthetic data generation, detector training, threshold fitting from
//! score files, scoring and alarming, repeated-trial experiments,
//! cross-validated benchmarks, and inflated-fraction sweeps.
//!
//! Exit codes: 0 success, 2 usage errors, 3 unreadable or malformed
//! inputs, 4 domain errors (invalid parameters, degenerate data).

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "opencat",
    version,
    about = "Alien detection thresholds with finite-sample guarantees",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample-size, tolerance, and tail-bound calculators.
    Bounds(commands::bounds::Args),
    /// Generate points from the 9-dimensional Gaussian benchmark.
    Synth(commands::synth::Args),
    /// Train an anomaly detector on clean feature rows.
    Train(commands::train::Args),
    /// Fit an alarm threshold from clean and contaminated score files.
    Threshold(commands::threshold::Args),
    /// Score points with a model and/or apply a threshold to scores.
    Score(commands::score::Args),
    /// Run a repeated-trial synthetic experiment from a TOML config.
    Experiment(commands::experiment::Args),
    /// Cross-validated benchmark on a labeled CSV.
    Cv(commands::cv::Args),
    /// Paired sweep over inflated alien fractions.
    Sweep(commands::sweep::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Bounds(args) => commands::bounds::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Threshold(args) => commands::threshold::run(args),
        Command::Score(args) => commands::score::run(args),
        Command::Experiment(args) => commands::experiment::run(args),
        Command::Cv(args) => commands::cv::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
    }
}

/// 3 for anything that reads as "your input could not be read",
/// 4 for everything else that got past parsing.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<opencat_core::Error>() {
            return if core.is_input_error() { 3 } else { 4 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<toml::de::Error>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
        {
            return 3;
        }
    }
    4
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}
