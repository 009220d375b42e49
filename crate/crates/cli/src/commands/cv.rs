//! `opencat cv`: k-fold benchmark on a labeled dataset.

use std::path::PathBuf;

use anyhow::Context;

use opencat_core::harness::cv::{run_cv_benchmark, CvConfig};
use opencat_core::harness::report::{fmt_opt, write_cv_folds_csv, write_cv_summary_csv};
use opencat_core::point::{read_labeled_csv, LabelRule};

use super::{ensure_dir, DetectorFlags, VariantFlag};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Labeled CSV: feature columns plus a label column.
    #[arg(long)]
    data: PathBuf,
    /// Name of a 0/1 column (0 = nominal, 1 = alien).
    #[arg(long, conflicts_with = "class_column")]
    label_column: Option<String>,
    /// Name of a categorical class column; requires --nominal.
    #[arg(long, requires = "nominal")]
    class_column: Option<String>,
    /// Comma-separated class names counted as nominal.
    #[arg(long, value_delimiter = ',')]
    nominal: Vec<String>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Fitting fraction override; defaults to the realized alien share.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    #[arg(long, value_enum, default_value_t = VariantFlag::Both)]
    variant: VariantFlag,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Share of nominal rows reserved for detector training.
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory for cv_folds.csv and cv_summary.csv.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let rule = match (&args.label_column, &args.class_column) {
        (Some(c), None) => LabelRule::BinaryColumn(c.clone()),
        (None, Some(c)) => LabelRule::ClassColumn {
            column: c.clone(),
            nominal: args.nominal.clone(),
        },
        (None, None) => LabelRule::BinaryColumn("label".to_string()),
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting label flags"),
    };
    let data = read_labeled_csv::<f64>(&args.data, &rule)
        .with_context(|| format!("cannot read {}", args.data.display()))?;

    let cfg = CvConfig {
        folds: args.folds,
        alpha: args.alpha,
        q: args.q,
        variants: args.variant.into(),
        detector: args.detector.to_config(),
        train_fraction: args.train_fraction,
        seed: Some(args.seed),
    };
    let report = run_cv_benchmark(&data, &cfg)?;

    ensure_dir(&args.out)?;
    write_cv_folds_csv(&args.out.join("cv_folds.csv"), &report)?;
    write_cv_summary_csv(&args.out.join("cv_summary.csv"), &report)?;
    std::fs::write(
        args.out.join("config.toml"),
        toml::to_string(&cfg).context("cannot serialize resolved config")?,
    )?;

    println!(
        "{} rows ({} nominal for training, {} in the mixture, realized alpha {}), {} folds",
        data.points().n_rows(),
        report.clean_size,
        report.mixture_size,
        report.realized_alpha,
        report.folds.len()
    );
    println!("fitting alpha: {}", report.fitting_alpha);
    for agg in &report.aggregates {
        println!(
            "  {}: recall {} (ci95 {}, {} folds), fpr {} (ci95 {}, {} folds)",
            agg.variant,
            fmt_opt(agg.mean_recall),
            fmt_opt(agg.recall_ci95),
            agg.folds_with_aliens,
            fmt_opt(agg.mean_fpr),
            fmt_opt(agg.fpr_ci95),
            agg.folds_with_nominals,
        );
    }
    println!("reports written to {}", args.out.display());
    Ok(())
}
