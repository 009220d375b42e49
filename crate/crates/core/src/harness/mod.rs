//! Repeated-trial experiment harness.
//!
//! A trial generates fresh clean, contaminated, and evaluation data from a
//! trial seed, trains a detector on the clean sample, fits thresholds from
//! the detector's scores, and measures recall on a pure-alien pool and
//! false-positive rate on a pure-nominal pool. Experiments repeat trials
//! under counter-derived seeds and aggregate the per-trial metrics,
//! including the empirical check of the quantile guarantee: the observed
//! `eta` such that recall is at least `1 - eta` in all but a `delta`
//! fraction of trials, and the sample size the theory would demand for the
//! tolerance that `eta` implies.

pub mod cv;
pub mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{check_admissibility, required_sample_size, AdmissibilityReport, PacParams};
use crate::cdf::{
    fraction_flagged, select_threshold, AlienCdfEstimate, DetectionThreshold, EmpiricalCdf, Tau,
    ThresholdVariant,
};
use crate::detectors::iforest::{IsoForest, IsoForestParams};
use crate::detectors::loda::{Loda, LodaParams};
use crate::detectors::{held_out_sample, score_sample, AnomalyScorer};
use crate::error::{Error, Result};
use crate::point::PointSet;
use crate::sample::{ScoreSample, ScoreSource};
use crate::seeds;
use crate::synth::{gen_alien, gen_mixture, gen_nominal, MixtureMode, SynthConfig};
use crate::Real;

use rand::distr::Distribution;
use rand_distr::StandardNormal;

/// Seed tags for the independent units of work inside one trial.
mod tag {
    pub const TRIALS: u64 = 0x5452_4941;
    pub const CLEAN: u64 = 1;
    pub const MIXTURE: u64 = 2;
    pub const EVAL_NOMINAL: u64 = 3;
    pub const EVAL_ALIEN: u64 = 4;
    pub const DETECTOR: u64 = 5;
}

/// Detector selection for synthetic experiments. Omitted fields take the
/// protocol defaults of the corresponding detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorConfig {
    IsolationForest {
        #[serde(default = "default_n_trees")]
        n_trees: usize,
        #[serde(default = "default_subsample_fraction")]
        subsample_fraction: f64,
    },
    Loda {
        #[serde(default = "default_n_projections")]
        n_projections: usize,
    },
}

fn default_n_trees() -> usize {
    IsoForestParams::default().n_trees
}

fn default_subsample_fraction() -> f64 {
    IsoForestParams::default().subsample_fraction
}

fn default_n_projections() -> usize {
    LodaParams::default().n_projections
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let p = IsoForestParams::default();
        DetectorConfig::IsolationForest {
            n_trees: p.n_trees,
            subsample_fraction: p.subsample_fraction,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DetectorConfig::IsolationForest {
                n_trees,
                subsample_fraction,
            } => IsoForestParams {
                n_trees,
                subsample_fraction,
            }
            .validate(),
            DetectorConfig::Loda { n_projections } => LodaParams { n_projections }.validate(),
        }
    }

    /// Train the configured detector.
    pub fn train<F: Real>(&self, data: &PointSet<F>, seed: u64) -> Result<Box<dyn AnomalyScorer<F>>>
    where
        StandardNormal: Distribution<F>,
    {
        match *self {
            DetectorConfig::IsolationForest {
                n_trees,
                subsample_fraction,
            } => {
                let params = IsoForestParams {
                    n_trees,
                    subsample_fraction,
                };
                Ok(Box::new(IsoForest::train(data, &params, seed)?))
            }
            DetectorConfig::Loda { n_projections } => {
                let params = LodaParams { n_projections };
                Ok(Box::new(Loda::train(data, &params, seed)?))
            }
        }
    }
}

/// Which threshold variants a run fits and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantChoice {
    Basic,
    Iso,
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> &'static [ThresholdVariant] {
        match self {
            VariantChoice::Basic => &[ThresholdVariant::Basic],
            VariantChoice::Iso => &[ThresholdVariant::Iso],
            VariantChoice::Both => &[ThresholdVariant::Basic, ThresholdVariant::Iso],
        }
    }

    fn wants_iso(self) -> bool {
        matches!(self, VariantChoice::Iso | VariantChoice::Both)
    }
}

/// Full specification of a synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub detector: DetectorConfig,
    /// Size of the clean sample and of the contaminated sample.
    pub n: usize,
    /// True alien fraction of the contaminated sample.
    pub alpha: f64,
    /// Optional inflated fraction used for fitting; must be in [alpha, 1].
    pub alpha_prime: Option<f64>,
    /// Target alien quantile level.
    pub q: f64,
    /// Failure-probability budget for the guarantee check.
    pub delta: f64,
    pub repetitions: usize,
    /// Size of each pure evaluation pool.
    pub eval_size: usize,
    pub variants: VariantChoice,
    pub mixture_mode: MixtureMode,
    pub synth: SynthConfig,
    /// Root seed. Required: experiments refuse to run without an explicit
    /// seed so no run is irreproducible by accident.
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            n: 10_000,
            alpha: 0.1,
            alpha_prime: None,
            q: 0.05,
            delta: 0.05,
            repetitions: 100,
            eval_size: 20_000,
            variants: VariantChoice::Both,
            mixture_mode: MixtureMode::ExactCount,
            synth: SynthConfig::default(),
            seed: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.synth.validate()?;
        if self.n < 1 {
            return Err(Error::Config("n must be at least 1".to_string()));
        }
        if self.eval_size < 1 {
            return Err(Error::Config("eval_size must be at least 1".to_string()));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".to_string()));
        }
        crate::cdf::validate_alpha(self.alpha)?;
        if let Some(ap) = self.alpha_prime {
            if !(ap >= self.alpha && ap <= 1.0) {
                return Err(Error::Config(format!(
                    "alpha_prime must lie in [alpha, 1] = [{}, 1], got {ap}",
                    self.alpha
                )));
            }
        }
        crate::cdf::validate_quantile(self.q)?;
        crate::bounds::validate_delta(self.delta)?;
        Ok(())
    }

    /// The root seed, which is mandatory for running.
    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config("a root seed is required; set `seed` or pass --seed".to_string())
        })
    }

    /// The alien fraction thresholds are fitted with.
    pub fn fitting_alpha(&self) -> f64 {
        self.alpha_prime.unwrap_or(self.alpha)
    }

    /// Seed of the `trial`-th trial under this config's root seed.
    pub fn trial_seed(&self, trial: usize) -> Result<u64> {
        let root = seeds::derive(self.seed()?, tag::TRIALS);
        Ok(seeds::derive(root, trial as u64))
    }
}

/// Detector factory used by [`run_synthetic_trial_with`]; lets tests inject
/// scorers with known behavior.
pub type TrainFn<'a, F> =
    dyn Fn(&PointSet<F>, u64) -> Result<Box<dyn AnomalyScorer<F>>> + Sync + 'a;

/// All scores produced by one trial, before any threshold is fitted.
///
/// Keeping these around lets a sweep refit thresholds at several assumed
/// alien fractions against identical data and detector randomness.
#[derive(Debug, Clone)]
pub struct TrialScores<F> {
    pub trial_seed: u64,
    /// Held-out detector scores of the clean training sample.
    pub clean: ScoreSample<F>,
    /// Full-ensemble scores of the contaminated sample.
    pub mixture: ScoreSample<F>,
    /// Full-ensemble scores of the pure-nominal evaluation pool.
    pub eval_nominal: ScoreSample<F>,
    /// Full-ensemble scores of the pure-alien evaluation pool.
    pub eval_alien: ScoreSample<F>,
}

/// Generate one trial's data, train the configured detector, and score
/// everything.
pub fn prepare_trial_scores<F: Real>(
    cfg: &ExperimentConfig,
    trial_seed: u64,
) -> Result<TrialScores<F>>
where
    StandardNormal: Distribution<F>,
{
    let train = |data: &PointSet<F>, seed: u64| cfg.detector.train(data, seed);
    prepare_trial_scores_with(cfg, trial_seed, &train)
}

/// [`prepare_trial_scores`] with an injected detector factory.
pub fn prepare_trial_scores_with<F: Real>(
    cfg: &ExperimentConfig,
    trial_seed: u64,
    train: &TrainFn<'_, F>,
) -> Result<TrialScores<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    let clean_points = gen_nominal::<F>(cfg.n, &cfg.synth, seeds::derive(trial_seed, tag::CLEAN))?;
    let mixture = gen_mixture::<F>(
        cfg.n,
        cfg.alpha,
        cfg.mixture_mode,
        &cfg.synth,
        seeds::derive(trial_seed, tag::MIXTURE),
    )?;
    let eval_nominal = gen_nominal::<F>(
        cfg.eval_size,
        &cfg.synth,
        seeds::derive(trial_seed, tag::EVAL_NOMINAL),
    )?;
    let eval_alien = gen_alien::<F>(
        cfg.eval_size,
        &cfg.synth,
        seeds::derive(trial_seed, tag::EVAL_ALIEN),
    )?;

    let detector = train(&clean_points, seeds::derive(trial_seed, tag::DETECTOR))?;
    Ok(TrialScores {
        trial_seed,
        clean: held_out_sample(detector.as_ref(), &clean_points)?,
        mixture: score_sample(detector.as_ref(), mixture.points(), ScoreSource::Mixture)?,
        eval_nominal: score_sample(detector.as_ref(), &eval_nominal, ScoreSource::External)?,
        eval_alien: score_sample(detector.as_ref(), &eval_alien.points, ScoreSource::External)?,
    })
}

/// One fitted threshold's performance in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantMetrics<F> {
    pub variant: ThresholdVariant,
    pub tau: Tau<F>,
    /// Fraction of the pure-alien pool that alarms.
    pub recall: f64,
    /// Fraction of the pure-nominal pool that alarms.
    pub fpr: f64,
}

/// Everything measured in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics<F> {
    pub trial_seed: u64,
    /// Whether the clean empirical CDF dominated the mixture CDF.
    pub admissible: bool,
    pub max_violation: f64,
    /// Threshold a clairvoyant would fit on the pure-alien pool itself.
    pub oracle_tau: Tau<F>,
    /// False-positive rate of the clairvoyant threshold.
    pub oracle_fpr: f64,
    pub results: Vec<VariantMetrics<F>>,
}

impl<F: Real> TrialMetrics<F> {
    /// Metrics of a specific variant, if it was fitted.
    pub fn variant(&self, v: ThresholdVariant) -> Option<&VariantMetrics<F>> {
        self.results.iter().find(|m| m.variant == v)
    }
}

/// Fit thresholds at `alpha_fit` from already-computed trial scores and
/// evaluate them, without regenerating data.
pub fn evaluate_trial<F: Real>(
    scores: &TrialScores<F>,
    alpha_fit: f64,
    q: f64,
    choice: VariantChoice,
) -> Result<(Vec<VariantMetrics<F>>, AdmissibilityReport)> {
    let f0 = EmpiricalCdf::from_sample(&scores.clean)?;
    let fm = EmpiricalCdf::from_sample(&scores.mixture)?;
    let admissibility = check_admissibility(&f0, &fm);

    let mut estimate = AlienCdfEstimate::from_cdfs(&f0, &fm, alpha_fit)?;
    if choice.wants_iso() {
        estimate = estimate.isotonize_and_clip();
    }

    let mut results = Vec::new();
    for &variant in choice.variants() {
        let threshold = select_threshold(&estimate, q, variant)?;
        results.push(VariantMetrics {
            variant,
            tau: threshold.tau(),
            recall: fraction_flagged(&scores.eval_alien, &threshold)?,
            fpr: fraction_flagged(&scores.eval_nominal, &threshold)?,
        });
    }
    Ok((results, admissibility))
}

/// The threshold a clairvoyant would pick: the same quantile rule applied
/// directly to the pure-alien scores.
pub fn oracle_threshold<F: Real>(
    alien_scores: &ScoreSample<F>,
    q: f64,
) -> Result<DetectionThreshold<F>> {
    crate::cdf::validate_quantile(q)?;
    let cdf = EmpiricalCdf::from_sample(alien_scores)?;
    let tau = cdf
        .cumulative()
        .iter()
        .rposition(|&v| v <= q)
        .map(|i| Tau::Score(cdf.support()[i]))
        .unwrap_or(Tau::FlagAll);
    DetectionThreshold::new(tau, q, ThresholdVariant::Basic)
}

/// Run one complete trial with the configured detector.
pub fn run_synthetic_trial<F: Real>(
    cfg: &ExperimentConfig,
    trial_seed: u64,
) -> Result<TrialMetrics<F>>
where
    StandardNormal: Distribution<F>,
{
    let train = |data: &PointSet<F>, seed: u64| cfg.detector.train(data, seed);
    run_synthetic_trial_with(cfg, trial_seed, &train)
}

/// [`run_synthetic_trial`] with an injected detector factory.
pub fn run_synthetic_trial_with<F: Real>(
    cfg: &ExperimentConfig,
    trial_seed: u64,
    train: &TrainFn<'_, F>,
) -> Result<TrialMetrics<F>>
where
    StandardNormal: Distribution<F>,
{
    let scores = prepare_trial_scores_with(cfg, trial_seed, train)?;
    let (results, admissibility) =
        evaluate_trial(&scores, cfg.fitting_alpha(), cfg.q, cfg.variants)?;
    let oracle = oracle_threshold(&scores.eval_alien, cfg.q)?;
    let oracle_fpr = fraction_flagged(&scores.eval_nominal, &oracle)?;
    Ok(TrialMetrics {
        trial_seed,
        admissible: admissibility.admissible,
        max_violation: admissibility.max_violation,
        oracle_tau: oracle.tau(),
        oracle_fpr,
        results,
    })
}

/// Nearest-rank quartiles of a metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Outcome of checking the quantile guarantee against observed recalls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GuaranteeCheck {
    /// The observed `eta` is within the target `q`: no extra tolerance was
    /// needed at this sample size.
    Met { eta: f64 },
    /// The observed `eta` exceeds `q` by `epsilon`; `required_n` is the
    /// sample size at which the theory guarantees that tolerance.
    Bounded {
        eta: f64,
        epsilon: f64,
        required_n: u64,
    },
    /// The implied tolerance is outside the valid range (or the required
    /// size overflows); the bound says nothing at these parameters.
    Unbounded { eta: f64, epsilon: f64 },
}

/// Aggregated metrics for one threshold variant across all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub variant: ThresholdVariant,
    pub trials: usize,
    pub mean_recall: f64,
    /// Half-width of the normal-approximation 95% confidence interval;
    /// absent for a single trial.
    pub recall_ci95: Option<f64>,
    pub recall_quartiles: Quartiles,
    pub mean_fpr: f64,
    pub fpr_ci95: Option<f64>,
    pub fpr_quartiles: Quartiles,
    /// Mean false-positive rate of the clairvoyant per-trial thresholds.
    pub mean_oracle_fpr: f64,
    /// Trials whose threshold degenerated to flag-everything.
    pub flag_all_count: usize,
    pub guarantee: GuaranteeCheck,
}

/// A full experiment: per-trial metrics plus per-variant aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport<F> {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialMetrics<F>>,
    pub aggregates: Vec<AggregateMetrics>,
}

/// Observed miss-rate ceiling: the smallest `eta` such that recall is at
/// least `1 - eta` in all but at most a `delta` fraction of trials.
///
/// With `R` trials this is one minus the `k`-th smallest recall for
/// `k = floor(delta * R) + 1`.
pub fn empirical_eta(recalls: &[f64], delta: f64) -> Result<f64> {
    if recalls.is_empty() {
        return Err(Error::EmptySample("empirical eta needs at least one recall"));
    }
    crate::bounds::validate_delta(delta)?;
    let mut sorted = recalls.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite recalls"));
    let k = ((delta * sorted.len() as f64).floor() as usize + 1).min(sorted.len());
    Ok(1.0 - sorted[k - 1])
}

/// Chain the observed `eta` into the sample-size calculator: how many
/// samples the theory would demand before promising the tolerance the run
/// actually achieved.
pub fn guarantee_check(recalls: &[f64], cfg: &ExperimentConfig) -> Result<GuaranteeCheck> {
    let eta = empirical_eta(recalls, cfg.delta)?;
    let epsilon = eta - cfg.q;
    if epsilon <= 0.0 {
        return Ok(GuaranteeCheck::Met { eta });
    }
    if epsilon >= 1.0 - cfg.q {
        return Ok(GuaranteeCheck::Unbounded { eta, epsilon });
    }
    let params = PacParams::new(cfg.alpha, cfg.alpha_prime, cfg.q, epsilon, cfg.delta)?;
    match required_sample_size(&params) {
        Ok(required_n) => Ok(GuaranteeCheck::Bounded {
            eta,
            epsilon,
            required_n,
        }),
        Err(Error::Config(_)) => Ok(GuaranteeCheck::Unbounded { eta, epsilon }),
        Err(e) => Err(e),
    }
}

fn aggregate_variant<F: Real>(
    variant: ThresholdVariant,
    trials: &[TrialMetrics<F>],
    cfg: &ExperimentConfig,
) -> Result<AggregateMetrics> {
    let picked: Vec<&VariantMetrics<F>> = trials
        .iter()
        .filter_map(|t| t.variant(variant))
        .collect();
    if picked.is_empty() {
        return Err(Error::Config(format!(
            "no trials carry metrics for variant {variant}"
        )));
    }
    let recalls: Vec<f64> = picked.iter().map(|m| m.recall).collect();
    let fprs: Vec<f64> = picked.iter().map(|m| m.fpr).collect();
    let oracle_fprs: Vec<f64> = trials.iter().map(|t| t.oracle_fpr).collect();
    Ok(AggregateMetrics {
        variant,
        trials: picked.len(),
        mean_recall: report::mean(&recalls),
        recall_ci95: report::ci95(&recalls),
        recall_quartiles: report::quartiles(&recalls)?,
        mean_fpr: report::mean(&fprs),
        fpr_ci95: report::ci95(&fprs),
        fpr_quartiles: report::quartiles(&fprs)?,
        mean_oracle_fpr: report::mean(&oracle_fprs),
        flag_all_count: picked
            .iter()
            .filter(|m| matches!(m.tau, Tau::FlagAll))
            .count(),
        guarantee: guarantee_check(&recalls, cfg)?,
    })
}

/// Run all trials of `cfg` (in parallel, deterministically) and aggregate.
pub fn run_experiment<F: Real>(cfg: &ExperimentConfig) -> Result<ExperimentReport<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    cfg.seed()?;
    let trials: Result<Vec<TrialMetrics<F>>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|t| run_synthetic_trial(cfg, cfg.trial_seed(t)?))
        .collect();
    let trials = trials?;
    let aggregates = cfg
        .variants
        .variants()
        .iter()
        .map(|&v| aggregate_variant(v, &trials, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        trials,
        aggregates,
    })
}

/// One row of an alien-fraction sweep: a threshold fitted at
/// `alpha + xi` against the same trial data as the `xi = 0` baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<F> {
    pub xi: f64,
    pub trial_seed: u64,
    pub variant: ThresholdVariant,
    /// Admissibility of the trial's empirical CDF pair.
    pub admissible: bool,
    pub tau: Tau<F>,
    pub recall: f64,
    pub fpr: f64,
    /// Change versus the same trial and variant at `xi = 0`.
    pub delta_recall: f64,
    pub delta_fpr: f64,
}

/// Per-`xi`, per-variant means across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub xi: f64,
    pub variant: ThresholdVariant,
    pub mean_recall: f64,
    pub mean_fpr: f64,
    pub mean_delta_recall: f64,
    pub mean_delta_fpr: f64,
}

/// A paired sweep over inflation offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<F> {
    pub config: ExperimentConfig,
    pub xis: Vec<f64>,
    pub rows: Vec<SweepRow<F>>,
    pub summary: Vec<SweepSummary>,
}

/// Refit thresholds at `alpha + xi` for each offset in `xis`, against
/// per-trial data shared across all offsets, and report paired deltas
/// versus the `xi = 0` baseline.
///
/// The baseline is always included as the first offset; pass only the
/// positive offsets to sweep. Offsets must keep `alpha + xi` within `(0, 1]`.
pub fn alpha_sweep<F: Real>(cfg: &ExperimentConfig, xis: &[f64]) -> Result<SweepReport<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    cfg.seed()?;
    if cfg.alpha_prime.is_some() {
        return Err(Error::Config(
            "sweeps control the fitting fraction themselves; leave alpha_prime unset".to_string(),
        ));
    }
    let mut offsets = vec![0.0];
    for &xi in xis {
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::Config(format!("offsets must be nonnegative, got {xi}")));
        }
        if cfg.alpha + xi > 1.0 {
            return Err(Error::Config(format!(
                "alpha + xi = {} exceeds 1",
                cfg.alpha + xi
            )));
        }
        if xi > 0.0 {
            offsets.push(xi);
        }
    }

    let per_trial: Result<Vec<Vec<SweepRow<F>>>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|t| {
            let trial_seed = cfg.trial_seed(t)?;
            let scores = prepare_trial_scores::<F>(cfg, trial_seed)?;
            let mut rows = Vec::new();
            let mut baseline: Vec<VariantMetrics<F>> = Vec::new();
            for (i, &xi) in offsets.iter().enumerate() {
                let (results, admissibility) =
                    evaluate_trial(&scores, cfg.alpha + xi, cfg.q, cfg.variants)?;
                if i == 0 {
                    baseline = results.clone();
                }
                for m in &results {
                    let base = baseline
                        .iter()
                        .find(|b| b.variant == m.variant)
                        .expect("baseline covers every variant");
                    rows.push(SweepRow {
                        xi,
                        trial_seed,
                        variant: m.variant,
                        admissible: admissibility.admissible,
                        tau: m.tau,
                        recall: m.recall,
                        fpr: m.fpr,
                        delta_recall: m.recall - base.recall,
                        delta_fpr: m.fpr - base.fpr,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let rows: Vec<SweepRow<F>> = per_trial?.into_iter().flatten().collect();

    let mut summary = Vec::new();
    for &xi in &offsets {
        for &variant in cfg.variants.variants() {
            let group: Vec<&SweepRow<F>> = rows
                .iter()
                .filter(|r| r.xi == xi && r.variant == variant)
                .collect();
            let pick = |f: fn(&SweepRow<F>) -> f64| {
                let v: Vec<f64> = group.iter().map(|r| f(r)).collect();
                report::mean(&v)
            };
            summary.push(SweepSummary {
                xi,
                variant,
                mean_recall: pick(|r| r.recall),
                mean_fpr: pick(|r| r.fpr),
                mean_delta_recall: pick(|r| r.delta_recall),
                mean_delta_fpr: pick(|r| r.delta_fpr),
            });
        }
    }

    Ok(SweepReport {
        config: cfg.clone(),
        xis: offsets,
        rows,
        summary,
    })
}
