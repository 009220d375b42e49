//! Cross-validated benchmark on labeled data.
//!
//! Real datasets give one fixed pool of points instead of an endless stream
//! of synthetic trials. This module assembles a clean sample and a
//! contaminated sample from a labeled pool, trains the detector once on the
//! clean sample, and then rotates folds of the contaminated sample: each
//! fold is held out for evaluation while the remaining folds supply the
//! mixture CDF the threshold is fitted from. Labels are used only for
//! assembly and evaluation, never for fitting.

use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::report;
use super::{DetectorConfig, VariantChoice};
use crate::cdf::{select_threshold, AlienCdfEstimate, EmpiricalCdf, Tau, ThresholdVariant};
use crate::detectors::held_out_sample;
use crate::error::{Error, Result};
use crate::point::{Label, LabeledPointSet};
use crate::sample::ScoreSample;
use crate::seeds;
use crate::Real;

mod tag {
    pub const ASSEMBLE: u64 = 0x4356_0001;
    pub const SHUFFLE: u64 = 0x4356_0002;
    pub const DETECTOR: u64 = 0x4356_0003;
}

/// Configuration of a cross-validated benchmark.
///
/// On the points route the mixture always consists of every alien row plus
/// the nominal rows left over after the clean sample is drawn, so the
/// realized alien fraction is determined by the data. `alpha` overrides the
/// fraction used for fitting only; leave it unset to fit at the realized
/// fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    /// Fitting fraction override in `(0, 1]`.
    pub alpha: Option<f64>,
    pub q: f64,
    pub variants: VariantChoice,
    /// Detector trained on the clean sample (points route only).
    pub detector: DetectorConfig,
    /// Share of nominal rows reserved as the clean sample (points route
    /// only).
    pub train_fraction: f64,
    pub seed: Option<u64>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            alpha: None,
            q: 0.05,
            variants: VariantChoice::Both,
            detector: DetectorConfig::default(),
            train_fraction: 0.5,
            seed: None,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "cross-validation needs at least 2 folds, got {}",
                self.folds
            )));
        }
        if let Some(a) = self.alpha {
            crate::cdf::validate_alpha(a)?;
        }
        crate::cdf::validate_quantile(self.q)?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        self.detector.validate()
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config("a root seed is required; set `seed` or pass --seed".to_string())
        })
    }
}

/// One threshold variant evaluated on one held-out fold. Rates are absent
/// when the fold contains no row of the relevant class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvFoldVariant<F> {
    pub variant: ThresholdVariant,
    pub tau: Tau<F>,
    pub recall: Option<f64>,
    pub fpr: Option<f64>,
}

/// Metrics of one held-out fold.
#[derive(Debug, Clone, PartialEq)]
pub struct CvFold<F> {
    pub fold: usize,
    pub size: usize,
    pub n_alien: usize,
    pub results: Vec<CvFoldVariant<F>>,
}

/// Fold-averaged metrics for one variant. Folds without rows of a class do
/// not contribute to that class's average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvAggregate {
    pub variant: ThresholdVariant,
    pub folds_with_aliens: usize,
    pub mean_recall: Option<f64>,
    pub recall_ci95: Option<f64>,
    pub folds_with_nominals: usize,
    pub mean_fpr: Option<f64>,
    pub fpr_ci95: Option<f64>,
}

/// Full outcome of a cross-validated benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport<F> {
    /// Alien fraction of the assembled (or supplied) mixture.
    pub realized_alpha: f64,
    /// Fraction the thresholds were fitted with.
    pub fitting_alpha: f64,
    pub clean_size: usize,
    pub mixture_size: usize,
    pub folds: Vec<CvFold<F>>,
    pub aggregates: Vec<CvAggregate>,
}

/// Assemble clean and contaminated samples from a labeled pool, train the
/// configured detector, and cross-validate the threshold.
pub fn run_cv_benchmark<F: Real>(
    data: &LabeledPointSet<F>,
    cfg: &CvConfig,
) -> Result<CvReport<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    let seed = cfg.seed()?;
    if data.n_alien() == 0 {
        return Err(Error::Config(
            "the labeled pool contains no alien rows".to_string(),
        ));
    }

    let mut nominal_idx: Vec<usize> = Vec::new();
    let mut alien_idx: Vec<usize> = Vec::new();
    for (i, label) in data.labels().iter().enumerate() {
        match label {
            Label::Nominal => nominal_idx.push(i),
            Label::Alien => alien_idx.push(i),
        }
    }
    let mut rng = seeds::rng(seeds::derive(seed, tag::ASSEMBLE));
    nominal_idx.shuffle(&mut rng);

    let clean_len = ((cfg.train_fraction * nominal_idx.len() as f64).round() as usize)
        .clamp(1, nominal_idx.len().saturating_sub(1).max(1));
    if clean_len >= nominal_idx.len() {
        return Err(Error::Config(format!(
            "need nominal rows left over for the mixture; {} nominal rows is too few",
            nominal_idx.len()
        )));
    }
    let (clean_part, rest) = nominal_idx.split_at(clean_len);
    let clean_points = data.points().select(clean_part);

    let mut mixture_idx: Vec<usize> = rest.to_vec();
    mixture_idx.extend_from_slice(&alien_idx);
    let mixture_points = data.points().select(&mixture_idx);
    let mixture_labels: Vec<Label> = mixture_idx.iter().map(|&i| data.labels()[i]).collect();

    let detector = cfg
        .detector
        .train(&clean_points, seeds::derive(seed, tag::DETECTOR))?;
    let clean_scores = held_out_sample(detector.as_ref(), &clean_points)?;
    // score_rows preserves row order, so scores pair with assembly labels.
    let labeled: Vec<(F, Label)> = detector
        .score_rows(&mixture_points)?
        .into_iter()
        .zip(mixture_labels)
        .collect();

    run_cv_scores(&clean_scores, &labeled, cfg)
}

/// Cross-validate thresholds from detector scores directly: held-out clean
/// scores plus labeled mixture scores.
///
/// The pairs are shuffled (seeded) before folding so fold membership does
/// not depend on the order the caller supplies. `detector` and
/// `train_fraction` in the config are ignored on this route.
pub fn run_cv_scores<F: Real>(
    clean: &ScoreSample<F>,
    mixture: &[(F, Label)],
    cfg: &CvConfig,
) -> Result<CvReport<F>> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    if mixture.len() <= cfg.folds {
        return Err(Error::Config(format!(
            "folds must be fewer than the {} mixture rows, got {}",
            mixture.len(),
            cfg.folds
        )));
    }
    for (s, _) in mixture {
        if !s.is_finite() {
            return Err(Error::NonFinite {
                context: "mixture score",
                value: s.widen(),
            });
        }
    }

    let mut pairs: Vec<(F, Label)> = mixture.to_vec();
    let mut rng = seeds::rng(seeds::derive(seed, tag::SHUFFLE));
    pairs.shuffle(&mut rng);

    let n_alien = pairs.iter().filter(|(_, l)| l.is_alien()).count();
    let realized_alpha = n_alien as f64 / pairs.len() as f64;
    let fitting_alpha = cfg.alpha.unwrap_or(realized_alpha);
    crate::cdf::validate_alpha(fitting_alpha)?;

    let f0 = EmpiricalCdf::from_sample(clean)?;
    let m = pairs.len();
    let mut folds = Vec::with_capacity(cfg.folds);
    for f in 0..cfg.folds {
        let start = f * m / cfg.folds;
        let end = (f + 1) * m / cfg.folds;
        let held_out = &pairs[start..end];
        let fitting: Vec<F> = pairs[..start]
            .iter()
            .chain(&pairs[end..])
            .map(|(s, _)| *s)
            .collect();
        let fm = EmpiricalCdf::from_values(&fitting)?;
        let mut estimate = AlienCdfEstimate::from_cdfs(&f0, &fm, fitting_alpha)?;
        if cfg.variants.wants_iso() {
            estimate = estimate.isotonize_and_clip();
        }

        let fold_aliens = held_out.iter().filter(|(_, l)| l.is_alien()).count();
        let fold_nominals = held_out.len() - fold_aliens;
        let mut results = Vec::new();
        for &variant in cfg.variants.variants() {
            let threshold = select_threshold(&estimate, cfg.q, variant)?;
            let mut hit_alien = 0usize;
            let mut hit_nominal = 0usize;
            for &(s, label) in held_out {
                if threshold.alarm(s) {
                    if label.is_alien() {
                        hit_alien += 1;
                    } else {
                        hit_nominal += 1;
                    }
                }
            }
            results.push(CvFoldVariant {
                variant,
                tau: threshold.tau(),
                recall: (fold_aliens > 0).then(|| hit_alien as f64 / fold_aliens as f64),
                fpr: (fold_nominals > 0).then(|| hit_nominal as f64 / fold_nominals as f64),
            });
        }
        folds.push(CvFold {
            fold: f,
            size: held_out.len(),
            n_alien: fold_aliens,
            results,
        });
    }

    let aggregates = cfg
        .variants
        .variants()
        .iter()
        .map(|&variant| {
            let recalls: Vec<f64> = folds
                .iter()
                .filter_map(|f| f.results.iter().find(|r| r.variant == variant))
                .filter_map(|r| r.recall)
                .collect();
            let fprs: Vec<f64> = folds
                .iter()
                .filter_map(|f| f.results.iter().find(|r| r.variant == variant))
                .filter_map(|r| r.fpr)
                .collect();
            CvAggregate {
                variant,
                folds_with_aliens: recalls.len(),
                mean_recall: (!recalls.is_empty()).then(|| report::mean(&recalls)),
                recall_ci95: report::ci95(&recalls),
                folds_with_nominals: fprs.len(),
                mean_fpr: (!fprs.is_empty()).then(|| report::mean(&fprs)),
                fpr_ci95: report::ci95(&fprs),
            }
        })
        .collect();

    Ok(CvReport {
        realized_alpha,
        fitting_alpha,
        clean_size: clean.len(),
        mixture_size: m,
        folds,
        aggregates,
    })
}
