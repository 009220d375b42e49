//! Aggregation statistics and CSV writers for experiment outputs.
//!
//! All numeric fields are written with Rust's shortest round-trip float
//! formatting, so rerunning an experiment with the same seed produces
//! byte-identical files. Missing values are written as `NA` and a
//! flag-everything threshold as the literal `flag_all`.

use std::path::Path;

use super::cv::CvReport;
use super::{AggregateMetrics, GuaranteeCheck, Quartiles, SweepRow, SweepSummary, TrialMetrics};
use crate::cdf::Tau;
use crate::error::{Error, Result};
use crate::Real;

/// Arithmetic mean. Callers guarantee a nonempty slice.
pub fn mean(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Bessel-corrected sample standard deviation; absent below two values.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Half-width of the normal-approximation 95% confidence interval for the
/// mean: `1.96 * sd / sqrt(n)`.
pub fn ci95(xs: &[f64]) -> Option<f64> {
    sample_sd(xs).map(|sd| 1.96 * sd / (xs.len() as f64).sqrt())
}

/// Nearest-rank quantile of sorted data: the `ceil(p * n)`-th smallest.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let k = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

/// Nearest-rank quartiles.
pub fn quartiles(xs: &[f64]) -> Result<Quartiles> {
    if xs.is_empty() {
        return Err(Error::EmptySample("quartiles need at least one value"));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    Ok(Quartiles {
        q25: nearest_rank(&sorted, 0.25),
        median: nearest_rank(&sorted, 0.50),
        q75: nearest_rank(&sorted, 0.75),
    })
}

/// Render a metric with shortest-roundtrip precision.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Render an optional metric, with `NA` for absent values.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt)
}

/// Render a threshold for CSV output.
pub fn fmt_tau<F: Real>(tau: Tau<F>) -> String {
    match tau {
        Tau::FlagAll => "flag_all".to_string(),
        Tau::Score(s) => format!("{s}"),
    }
}

fn guarantee_fields(g: &GuaranteeCheck) -> (String, String, String, String) {
    match *g {
        GuaranteeCheck::Met { eta } => ("met".to_string(), fmt(eta), "NA".into(), "NA".into()),
        GuaranteeCheck::Bounded {
            eta,
            epsilon,
            required_n,
        } => (
            "bounded".to_string(),
            fmt(eta),
            fmt(epsilon),
            required_n.to_string(),
        ),
        GuaranteeCheck::Unbounded { eta, epsilon } => (
            "unbounded".to_string(),
            fmt(eta),
            fmt(epsilon),
            "NA".into(),
        ),
    }
}

/// One row per trial and variant.
pub fn write_trials_csv<F: Real>(path: &Path, trials: &[TrialMetrics<F>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "trial",
        "trial_seed",
        "variant",
        "tau",
        "recall",
        "fpr",
        "admissible",
        "max_violation",
        "oracle_tau",
        "oracle_fpr",
    ])?;
    for (i, t) in trials.iter().enumerate() {
        for m in &t.results {
            w.write_record([
                i.to_string(),
                t.trial_seed.to_string(),
                m.variant.to_string(),
                fmt_tau(m.tau),
                fmt(m.recall),
                fmt(m.fpr),
                t.admissible.to_string(),
                fmt(t.max_violation),
                fmt_tau(t.oracle_tau),
                fmt(t.oracle_fpr),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per variant with means, spread, and the guarantee check.
pub fn write_summary_csv(path: &Path, aggregates: &[AggregateMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "trials",
        "mean_recall",
        "recall_ci95",
        "recall_q25",
        "recall_median",
        "recall_q75",
        "mean_fpr",
        "fpr_ci95",
        "fpr_q25",
        "fpr_median",
        "fpr_q75",
        "mean_oracle_fpr",
        "flag_all_count",
        "guarantee_status",
        "eta",
        "epsilon",
        "required_n",
    ])?;
    for a in aggregates {
        let (status, eta, epsilon, required_n) = guarantee_fields(&a.guarantee);
        w.write_record([
            a.variant.to_string(),
            a.trials.to_string(),
            fmt(a.mean_recall),
            fmt_opt(a.recall_ci95),
            fmt(a.recall_quartiles.q25),
            fmt(a.recall_quartiles.median),
            fmt(a.recall_quartiles.q75),
            fmt(a.mean_fpr),
            fmt_opt(a.fpr_ci95),
            fmt(a.fpr_quartiles.q25),
            fmt(a.fpr_quartiles.median),
            fmt(a.fpr_quartiles.q75),
            fmt(a.mean_oracle_fpr),
            a.flag_all_count.to_string(),
            status,
            eta,
            epsilon,
            required_n,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per trial, offset, and variant of a sweep.
pub fn write_sweep_rows_csv<F: Real>(path: &Path, rows: &[SweepRow<F>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "xi",
        "trial_seed",
        "variant",
        "admissible",
        "tau",
        "recall",
        "fpr",
        "delta_recall",
        "delta_fpr",
    ])?;
    for r in rows {
        w.write_record([
            fmt(r.xi),
            r.trial_seed.to_string(),
            r.variant.to_string(),
            r.admissible.to_string(),
            fmt_tau(r.tau),
            fmt(r.recall),
            fmt(r.fpr),
            fmt(r.delta_recall),
            fmt(r.delta_fpr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-offset, per-variant sweep means; plot-ready delta columns.
pub fn write_sweep_summary_csv(path: &Path, summary: &[SweepSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "xi",
        "variant",
        "mean_recall",
        "mean_fpr",
        "mean_delta_recall",
        "mean_delta_fpr",
    ])?;
    for s in summary {
        w.write_record([
            fmt(s.xi),
            s.variant.to_string(),
            fmt(s.mean_recall),
            fmt(s.mean_fpr),
            fmt(s.mean_delta_recall),
            fmt(s.mean_delta_fpr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per fold and variant of a cross-validated benchmark.
pub fn write_cv_folds_csv<F: Real>(path: &Path, report: &CvReport<F>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "fold", "size", "n_alien", "variant", "tau", "recall", "fpr",
    ])?;
    for f in &report.folds {
        for m in &f.results {
            w.write_record([
                f.fold.to_string(),
                f.size.to_string(),
                f.n_alien.to_string(),
                m.variant.to_string(),
                fmt_tau(m.tau),
                fmt_opt(m.recall),
                fmt_opt(m.fpr),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fold-averaged cross-validation metrics, one row per variant.
pub fn write_cv_summary_csv<F: Real>(path: &Path, report: &CvReport<F>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "realized_alpha",
        "fitting_alpha",
        "clean_size",
        "mixture_size",
        "folds_with_aliens",
        "mean_recall",
        "recall_ci95",
        "folds_with_nominals",
        "mean_fpr",
        "fpr_ci95",
    ])?;
    for a in &report.aggregates {
        w.write_record([
            a.variant.to_string(),
            fmt(report.realized_alpha),
            fmt(report.fitting_alpha),
            report.clean_size.to_string(),
            report.mixture_size.to_string(),
            a.folds_with_aliens.to_string(),
            fmt_opt(a.mean_recall),
            fmt_opt(a.recall_ci95),
            a.folds_with_nominals.to_string(),
            fmt_opt(a.mean_fpr),
            fmt_opt(a.fpr_ci95),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates of one experiment in a grid over `(alpha, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComboSummary {
    pub alpha: f64,
    pub n: usize,
    pub aggregates: Vec<AggregateMetrics>,
}

/// Write the three plot-data files a grid of experiments supports:
/// recall against sample size, false-positive-rate quartiles against the
/// clairvoyant baseline, and the looseness of the sample-size bound.
pub fn write_plot_csvs(dir: &Path, combos: &[ComboSummary]) -> Result<()> {
    let mut recall = csv::Writer::from_path(dir.join("plot_recall_vs_n.csv"))?;
    recall.write_record(["alpha", "n", "variant", "mean_recall", "recall_ci95"])?;
    let mut fpr = csv::Writer::from_path(dir.join("plot_fpr_quartiles.csv"))?;
    fpr.write_record([
        "alpha",
        "n",
        "variant",
        "fpr_q25",
        "fpr_median",
        "fpr_q75",
        "mean_oracle_fpr",
    ])?;
    let mut loose = csv::Writer::from_path(dir.join("plot_bound_looseness.csv"))?;
    loose.write_record([
        "alpha",
        "n",
        "variant",
        "guarantee_status",
        "eta",
        "epsilon",
        "required_n",
    ])?;

    for combo in combos {
        for a in &combo.aggregates {
            recall.write_record([
                fmt(combo.alpha),
                combo.n.to_string(),
                a.variant.to_string(),
                fmt(a.mean_recall),
                fmt_opt(a.recall_ci95),
            ])?;
            fpr.write_record([
                fmt(combo.alpha),
                combo.n.to_string(),
                a.variant.to_string(),
                fmt(a.fpr_quartiles.q25),
                fmt(a.fpr_quartiles.median),
                fmt(a.fpr_quartiles.q75),
                fmt(a.mean_oracle_fpr),
            ])?;
            let (status, eta, epsilon, required_n) = guarantee_fields(&a.guarantee);
            loose.write_record([
                fmt(combo.alpha),
                combo.n.to_string(),
                a.variant.to_string(),
                status,
                eta,
                epsilon,
                required_n,
            ])?;
        }
    }
    recall.flush()?;
    fpr.flush()?;
    loose.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf::ThresholdVariant;
    use crate::harness::VariantMetrics;

    #[test]
    fn mean_sd_and_ci_match_hand_computations() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < 1e-15);
        let sd = sample_sd(&xs).unwrap();
        assert!((sd - (5.0_f64 / 3.0).sqrt()).abs() < 1e-15);
        let ci = ci95(&xs).unwrap();
        assert!((ci - 1.96 * sd / 2.0).abs() < 1e-15);
        assert_eq!(sample_sd(&[7.0]), None);
        assert_eq!(ci95(&[7.0]), None);
    }

    #[test]
    fn quartiles_use_nearest_rank() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let q = quartiles(&xs).unwrap();
        assert_eq!((q.q25, q.median, q.q75), (3.0, 5.0, 8.0));

        let q = quartiles(&[4.0]).unwrap();
        assert_eq!((q.q25, q.median, q.q75), (4.0, 4.0, 4.0));

        // Order of the input must not matter.
        let q = quartiles(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((q.q25, q.median, q.q75), (2.0, 3.0, 4.0));

        assert!(quartiles(&[]).is_err());
    }

    #[test]
    fn trial_rows_render_sentinels_and_are_reproducible() {
        let trials = vec![TrialMetrics::<f64> {
            trial_seed: 99,
            admissible: true,
            max_violation: 0.0,
            oracle_tau: Tau::Score(1.5),
            oracle_fpr: 0.01,
            results: vec![
                VariantMetrics {
                    variant: ThresholdVariant::Basic,
                    tau: Tau::FlagAll,
                    recall: 1.0,
                    fpr: 1.0,
                },
                VariantMetrics {
                    variant: ThresholdVariant::Iso,
                    tau: Tau::Score(0.625),
                    recall: 0.975,
                    fpr: 0.0125,
                },
            ],
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        write_trials_csv(&path, &trials).unwrap();
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.starts_with("trial,trial_seed,variant,tau,"));
        assert!(first.contains("0,99,basic,flag_all,1,1,true,0,1.5,0.01"));
        assert!(first.contains("0,99,iso,0.625,0.975,0.0125,true,0,1.5,0.01"));

        write_trials_csv(&path, &trials).unwrap();
        assert_eq!(first, std::fs::read_to_string(&path).unwrap());
    }

    #[test]
    fn summary_rows_render_the_guarantee_check() {
        let base = AggregateMetrics {
            variant: ThresholdVariant::Basic,
            trials: 3,
            mean_recall: 0.9,
            recall_ci95: None,
            recall_quartiles: Quartiles {
                q25: 0.8,
                median: 0.9,
                q75: 1.0,
            },
            mean_fpr: 0.05,
            fpr_ci95: Some(0.01),
            fpr_quartiles: Quartiles {
                q25: 0.04,
                median: 0.05,
                q75: 0.06,
            },
            mean_oracle_fpr: 0.03,
            flag_all_count: 0,
            guarantee: GuaranteeCheck::Bounded {
                eta: 0.2,
                epsilon: 0.15,
                required_n: 874,
            },
        };
        let met = AggregateMetrics {
            variant: ThresholdVariant::Iso,
            guarantee: GuaranteeCheck::Met { eta: 0.04 },
            ..base.clone()
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        write_summary_csv(&path, &[base, met]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("bounded,0.2,0.15,874"));
        assert!(text.contains("met,0.04,NA,NA"));
        assert!(text.contains(",NA,0.8,"), "missing CI prints NA");
    }
}
