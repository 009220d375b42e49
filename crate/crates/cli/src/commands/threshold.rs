//! `opencat threshold`: fit an alarm threshold from score files.

use std::path::PathBuf;

use anyhow::Context;

use opencat_core::bounds::check_admissibility;
use opencat_core::cdf::{fit_threshold, EmpiricalCdf, ThresholdVariant};
use opencat_core::io::{save_threshold, sha256_hex, Provenance, ThresholdRecord};
use opencat_core::sample::{read_scores, ScoreSample, ScoreSource};

use super::display_tau;

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SingleVariant {
    Basic,
    Iso,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scores of the clean sample (plain lines or CSV with a score column).
    #[arg(long)]
    clean: PathBuf,
    /// Scores of the contaminated sample.
    #[arg(long)]
    mixture: PathBuf,
    /// Alien fraction assumed for the contaminated sample.
    #[arg(long)]
    alpha: f64,
    /// Alien quantile level the threshold targets.
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    #[arg(long, value_enum, default_value_t = SingleVariant::Basic)]
    variant: SingleVariant,
    /// Output threshold JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let clean_values = read_scores(&args.clean)
        .with_context(|| format!("cannot read {}", args.clean.display()))?;
    let mixture_values = read_scores(&args.mixture)
        .with_context(|| format!("cannot read {}", args.mixture.display()))?;
    let clean = ScoreSample::new(clean_values, ScoreSource::Clean)?;
    let mixture = ScoreSample::new(mixture_values, ScoreSource::Mixture)?;

    let variant = match args.variant {
        SingleVariant::Basic => ThresholdVariant::Basic,
        SingleVariant::Iso => ThresholdVariant::Iso,
    };
    let (estimate, threshold) = fit_threshold(&clean, &mixture, args.alpha, args.q, variant)?;

    let admissibility = check_admissibility(
        &EmpiricalCdf::from_sample(&clean)?,
        &EmpiricalCdf::from_sample(&mixture)?,
    );

    println!("tau: {}", display_tau(threshold.tau()));
    println!(
        "q: {}  variant: {}  alpha: {}  grid points: {}",
        threshold.q(),
        threshold.variant(),
        estimate.alpha(),
        estimate.grid().len()
    );
    println!(
        "admissible: {} (max violation {})",
        admissibility.admissible, admissibility.max_violation
    );

    if let Some(out) = &args.out {
        let record = ThresholdRecord {
            threshold,
            alpha: args.alpha,
            provenance: Some(Provenance {
                clean_sha256: sha256_hex(&args.clean)?,
                mixture_sha256: sha256_hex(&args.mixture)?,
            }),
        };
        save_threshold(out, &record)
            .with_context(|| format!("cannot write {}", out.display()))?;
        println!("saved threshold to {}", out.display());
    }
    Ok(())
}
