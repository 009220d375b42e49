//! `opencat sweep`: refit thresholds at inflated fractions `alpha + xi`
//! on shared per-trial data and report the paired deltas.

use std::path::PathBuf;

use anyhow::Context;

use opencat_core::harness::report::{fmt, write_sweep_rows_csv, write_sweep_summary_csv};
use opencat_core::harness::{alpha_sweep, ExperimentConfig};

use super::ensure_dir;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Experiment config TOML; `alpha_prime` must stay unset.
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the `seed` key of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated positive inflation offsets; the xi = 0 baseline is
    /// always included.
    #[arg(long, value_delimiter = ',', required = true)]
    xis: Vec<f64>,
    /// Output directory for sweep_rows.csv and sweep_summary.csv.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let mut cfg: ExperimentConfig =
        toml::from_str(&text).with_context(|| format!("bad config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }

    let report = alpha_sweep::<f64>(&cfg, &args.xis)?;

    ensure_dir(&args.out)?;
    write_sweep_rows_csv(&args.out.join("sweep_rows.csv"), &report.rows)?;
    write_sweep_summary_csv(&args.out.join("sweep_summary.csv"), &report.summary)?;
    let xis_echo = report
        .xis
        .iter()
        .map(|x| fmt(*x))
        .collect::<Vec<_>>()
        .join(", ");
    std::fs::write(
        args.out.join("config.toml"),
        format!(
            "xis = [{xis_echo}]\n{}",
            toml::to_string(&report.config).context("cannot serialize resolved config")?
        ),
    )?;

    println!(
        "swept {} offsets over {} trials at alpha = {}:",
        report.xis.len(),
        cfg.repetitions,
        cfg.alpha
    );
    for s in &report.summary {
        println!(
            "  xi {} [{}]: recall {} (delta {}), fpr {} (delta {})",
            fmt(s.xi),
            s.variant,
            fmt(s.mean_recall),
            fmt(s.mean_delta_recall),
            fmt(s.mean_fpr),
            fmt(s.mean_delta_fpr),
        );
    }
    println!("reports written to {}", args.out.display());
    Ok(())
}
