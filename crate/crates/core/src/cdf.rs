//! Empirical CDFs, mixture-inverted alien CDF estimation, and threshold
//! selection.
//!
//! The contaminated sample is modeled as a two-component mixture: a fraction
//! `1 - alpha` of nominal points and `alpha` of alien points. At every score
//! `x` the mixture CDF therefore satisfies
//! `Fm(x) = (1 - alpha) * F0(x) + alpha * Fa(x)`, which inverts to an alien
//! CDF estimate from the two observable empirical CDFs. Thresholding that
//! estimate at a quantile level `q` caps the fraction of aliens scoring at
//! or below the alarm threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::pava_non_decreasing;
use crate::sample::ScoreSample;
use crate::Real;

/// Empirical distribution function of a finite sample.
///
/// Stores the distinct sorted support with cumulative fractions; evaluation
/// is right-continuous: `eval(x)` is the fraction of sample values `<= x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<F> {
    support: Vec<F>,
    cum: Vec<f64>,
}

impl<F: Real> EmpiricalCdf<F> {
    /// Build from a score sample. Errors on an empty sample.
    pub fn from_sample(sample: &ScoreSample<F>) -> Result<Self> {
        Self::from_sorted(sample.values())
    }

    /// Build from scores in any order. Errors on an empty slice.
    pub fn from_values(values: &[F]) -> Result<Self> {
        let mut v = values.to_vec();
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "empirical CDF input",
                value: bad.widen(),
            });
        }
        v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite scores compare"));
        Self::from_sorted(&v)
    }

    fn from_sorted(values: &[F]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample("empirical CDF needs at least one value"));
        }
        let n = values.len() as f64;
        let mut support = Vec::new();
        let mut cum = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            let is_last_of_run = i + 1 == values.len() || values[i + 1] > v;
            if is_last_of_run {
                support.push(v);
                cum.push((i + 1) as f64 / n);
            }
        }
        Ok(Self { support, cum })
    }

    /// Fraction of the sample at or below `x`.
    pub fn eval(&self, x: F) -> f64 {
        let idx = self.support.partition_point(|v| *v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// Distinct sample values in ascending order.
    pub fn support(&self) -> &[F] {
        &self.support
    }

    /// Cumulative fractions aligned with [`support`](Self::support).
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    /// Largest sample value.
    pub fn max_support(&self) -> F {
        *self.support.last().expect("support is non-empty")
    }
}

/// Sorted distinct union of the supports of two empirical CDFs.
pub fn union_grid<F: Real>(a: &EmpiricalCdf<F>, b: &EmpiricalCdf<F>) -> Vec<F> {
    let mut grid = Vec::with_capacity(a.support().len() + b.support().len());
    let (mut i, mut j) = (0, 0);
    let (sa, sb) = (a.support(), b.support());
    while i < sa.len() || j < sb.len() {
        let next = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => {
                if x <= y {
                    i += 1;
                    if x == y {
                        j += 1;
                    }
                    x
                } else {
                    j += 1;
                    y
                }
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!("loop condition"),
        };
        grid.push(next);
    }
    grid
}

/// Mixture-inverted estimate of the alien score CDF on a finite grid.
///
/// `raw` holds `(Fm(g) - (1 - alpha) * F0(g)) / alpha` at every grid point
/// `g`; it always ends at exactly 1 but is neither monotone nor confined to
/// `[0, 1]` in between. `legal`, populated by
/// [`isotonize_and_clip`](Self::isotonize_and_clip), is the least-squares
/// non-decreasing fit clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlienCdfEstimate<F> {
    grid: Vec<F>,
    raw: Vec<f64>,
    legal: Option<Vec<f64>>,
    alpha: f64,
}

impl<F: Real> AlienCdfEstimate<F> {
    /// Invert the mixture relationship on the union grid of the two CDFs.
    ///
    /// `alpha` is the assumed alien fraction of the contaminated sample; it
    /// may deliberately overstate the true fraction (see
    /// [`check_admissibility`](crate::bounds::check_admissibility) for when
    /// that is safe).
    pub fn from_cdfs(
        clean: &EmpiricalCdf<F>,
        mixture: &EmpiricalCdf<F>,
        alpha: f64,
    ) -> Result<Self> {
        validate_alpha(alpha)?;
        let grid = union_grid(clean, mixture);
        let raw: Vec<f64> = grid
            .iter()
            .map(|&g| (mixture.eval(g) - (1.0 - alpha) * clean.eval(g)) / alpha)
            .collect();
        debug_assert!(
            (raw.last().expect("grid is non-empty") - 1.0).abs() <= 1e-12,
            "both CDFs reach 1 at the grid maximum"
        );
        Ok(Self {
            grid,
            raw,
            legal: None,
            alpha,
        })
    }

    /// Replace nothing, derive everything: returns the same estimate with
    /// `legal` populated by isotonic regression followed by clipping to
    /// `[0, 1]`. `raw` is untouched.
    pub fn isotonize_and_clip(mut self) -> Self {
        let legal = pava_non_decreasing(&self.raw)
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect();
        self.legal = Some(legal);
        self
    }

    /// Grid points (sorted distinct union of both samples).
    pub fn grid(&self) -> &[F] {
        &self.grid
    }

    /// Uncorrected estimate values on the grid.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// Isotonized and clipped values, if populated.
    pub fn legal(&self) -> Option<&[f64]> {
        self.legal.as_deref()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Assemble an estimate from explicit parts. Intended for tests and
    /// diagnostics of the threshold rule; `from_cdfs` is the real
    /// constructor.
    #[doc(hidden)]
    pub fn from_raw_parts(grid: Vec<F>, raw: Vec<f64>, alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        if grid.is_empty() || grid.len() != raw.len() {
            return Err(Error::Config(
                "grid and raw values must be non-empty and equal-length".to_string(),
            ));
        }
        Ok(Self {
            grid,
            raw,
            legal: None,
            alpha,
        })
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

pub(crate) fn validate_quantile(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidQuantile(q));
    }
    Ok(())
}

/// Which estimate the threshold rule consults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// Threshold on the raw mixture-inverted values.
    Basic,
    /// Threshold on the isotonized, clipped values.
    Iso,
}

impl std::fmt::Display for ThresholdVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdVariant::Basic => write!(f, "basic"),
            ThresholdVariant::Iso => write!(f, "iso"),
        }
    }
}

/// Alarm threshold, possibly degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau<F> {
    /// No grid point had estimate value at or below `q`: every score alarms.
    FlagAll,
    /// Alarm on scores strictly greater than this value.
    Score(F),
}

/// A fitted alarm threshold together with the level and variant that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionThreshold<F> {
    tau: Tau<F>,
    q: f64,
    variant: ThresholdVariant,
}

impl<F: Real> DetectionThreshold<F> {
    pub fn new(tau: Tau<F>, q: f64, variant: ThresholdVariant) -> Result<Self> {
        validate_quantile(q)?;
        Ok(Self { tau, q, variant })
    }

    pub fn tau(&self) -> Tau<F> {
        self.tau
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn variant(&self) -> ThresholdVariant {
        self.variant
    }

    /// Alarm decision for one score: strictly above the threshold alarms;
    /// the degenerate threshold alarms on everything.
    pub fn alarm(&self, score: F) -> bool {
        match self.tau {
            Tau::FlagAll => true,
            Tau::Score(t) => score > t,
        }
    }
}

/// Pick the largest grid point whose estimated alien CDF value is at most
/// `q`.
///
/// With the chosen estimate `G`, the threshold is
/// `max { u in grid : G(u) <= q }`; if no grid point qualifies the
/// degenerate [`Tau::FlagAll`] threshold is returned. The scan consults
/// `raw` or `legal` values according to `variant`; the `iso` variant
/// requires [`AlienCdfEstimate::isotonize_and_clip`] to have run.
pub fn select_threshold<F: Real>(
    estimate: &AlienCdfEstimate<F>,
    q: f64,
    variant: ThresholdVariant,
) -> Result<DetectionThreshold<F>> {
    validate_quantile(q)?;
    let values: &[f64] = match variant {
        ThresholdVariant::Basic => estimate.raw(),
        ThresholdVariant::Iso => estimate.legal().ok_or(Error::IsotonizationRequired)?,
    };
    let tau = values
        .iter()
        .rposition(|&v| v <= q)
        .map(|i| Tau::Score(estimate.grid()[i]))
        .unwrap_or(Tau::FlagAll);
    DetectionThreshold::new(tau, q, variant)
}

/// Convenience composition: empirical CDFs of both samples, mixture
/// inversion at `alpha`, optional isotonization, threshold selection.
///
/// Returns the estimate alongside the threshold so callers can inspect
/// diagnostics or fit further thresholds without re-estimating.
pub fn fit_threshold<F: Real>(
    clean: &ScoreSample<F>,
    mixture: &ScoreSample<F>,
    alpha: f64,
    q: f64,
    variant: ThresholdVariant,
) -> Result<(AlienCdfEstimate<F>, DetectionThreshold<F>)> {
    let f0 = EmpiricalCdf::from_sample(clean)?;
    let fm = EmpiricalCdf::from_sample(mixture)?;
    let mut estimate = AlienCdfEstimate::from_cdfs(&f0, &fm, alpha)?;
    if variant == ThresholdVariant::Iso {
        estimate = estimate.isotonize_and_clip();
    }
    let threshold = select_threshold(&estimate, q, variant)?;
    Ok((estimate, threshold))
}

/// Alarm decisions for a whole sample, in the sample's (sorted) order.
pub fn classify<F: Real>(scores: &ScoreSample<F>, threshold: &DetectionThreshold<F>) -> Vec<bool> {
    scores.values().iter().map(|&s| threshold.alarm(s)).collect()
}

/// Fraction of `scores` that alarm. Errors on an empty sample.
pub fn fraction_flagged<F: Real>(
    scores: &ScoreSample<F>,
    threshold: &DetectionThreshold<F>,
) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptySample("cannot compute an alarm fraction"));
    }
    let flagged = match threshold.tau() {
        Tau::FlagAll => scores.len(),
        Tau::Score(t) => scores.count_above(t),
    };
    Ok(flagged as f64 / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::ScoreSource;

    fn sample(values: &[f64]) -> ScoreSample<f64> {
        ScoreSample::new(values.to_vec(), ScoreSource::External).unwrap()
    }

    #[test]
    fn ecdf_counts_ties_and_is_right_continuous() {
        let cdf = EmpiricalCdf::from_values(&[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(cdf.eval(1.0), 0.25);
        assert_eq!(cdf.eval(2.0), 0.75);
        assert_eq!(cdf.eval(3.0), 0.75);
        assert_eq!(cdf.eval(4.0), 1.0);
        assert_eq!(cdf.eval(0.0), 0.0);
        assert_eq!(cdf.eval(100.0), 1.0);
        assert_eq!(cdf.support(), &[1.0, 2.0, 4.0]);
    }

    #[test]
    fn ecdf_of_single_point_is_a_step() {
        let cdf = EmpiricalCdf::from_values(&[0.5]).unwrap();
        assert_eq!(cdf.eval(0.49), 0.0);
        assert_eq!(cdf.eval(0.5), 1.0);
        assert_eq!(cdf.max_support(), 0.5);
    }

    #[test]
    fn ecdf_rejects_empty_and_non_finite() {
        assert!(matches!(
            EmpiricalCdf::<f64>::from_values(&[]),
            Err(Error::EmptySample(_))
        ));
        assert!(matches!(
            EmpiricalCdf::from_values(&[1.0, f64::INFINITY]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn union_grid_merges_and_dedupes() {
        let a = EmpiricalCdf::from_values(&[1.0, 3.0, 3.0]).unwrap();
        let b = EmpiricalCdf::from_values(&[2.0, 3.0, 5.0]).unwrap();
        assert_eq!(union_grid(&a, &b), vec![1.0, 2.0, 3.0, 5.0]);
    }

    // Worked fixture used across the crate: S0 = {1,2,3,4}, Sm = {2,3,5,6},
    // alpha = 0.5. The inverted estimate on the union grid {1,...,6} is
    // [-0.25, 0, 0.25, 0, 0.5, 1], so tau(q = 0.25) = 4.
    fn fixture() -> AlienCdfEstimate<f64> {
        let f0 = EmpiricalCdf::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let fm = EmpiricalCdf::from_values(&[2.0, 3.0, 5.0, 6.0]).unwrap();
        AlienCdfEstimate::from_cdfs(&f0, &fm, 0.5).unwrap()
    }

    #[test]
    fn mixture_inversion_matches_hand_computation() {
        let est = fixture();
        assert_eq!(est.grid(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let expected = [-0.25, 0.0, 0.25, 0.0, 0.5, 1.0];
        for (got, want) in est.raw().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn alpha_one_reduces_to_the_mixture_cdf() {
        let f0 = EmpiricalCdf::from_values(&[10.0]).unwrap();
        let fm = EmpiricalCdf::from_values(&[1.0, 2.0]).unwrap();
        let est = AlienCdfEstimate::from_cdfs(&f0, &fm, 1.0).unwrap();
        for (&g, &r) in est.grid().iter().zip(est.raw()) {
            assert!((r - fm.eval(g)).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_alpha_is_rejected() {
        let f0 = EmpiricalCdf::from_values(&[1.0]).unwrap();
        for bad in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                AlienCdfEstimate::from_cdfs(&f0, &f0, bad),
                Err(Error::InvalidAlpha(_))
            ));
        }
    }

    #[test]
    fn isotonize_and_clip_monotonizes_into_unit_range() {
        let est = fixture().isotonize_and_clip();
        let legal = est.legal().unwrap();
        assert!(legal.windows(2).all(|w| w[0] <= w[1]));
        assert!(legal.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // Raw [-0.25, 0, .25, 0, .5, 1]: the {.25, 0} violation pools to
        // .125; the leading negative value clips to 0.
        let expected = [0.0, 0.0, 0.125, 0.125, 0.5, 1.0];
        for (got, want) in legal.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(est.raw()[0], -0.25, "raw is untouched");
    }

    #[test]
    fn threshold_picks_largest_qualifying_grid_point() {
        let t = select_threshold(&fixture(), 0.25, ThresholdVariant::Basic).unwrap();
        assert_eq!(t.tau(), Tau::Score(4.0));
    }

    #[test]
    fn threshold_respects_the_iso_variant() {
        let est = fixture().isotonize_and_clip();
        // Legal values [0, 0, .125, .125, .5, 1]: largest <= 0.25 is at 4.0.
        let t = select_threshold(&est, 0.25, ThresholdVariant::Iso).unwrap();
        assert_eq!(t.tau(), Tau::Score(4.0));
        // At q = 0.1 only the clipped zeros qualify.
        let t = select_threshold(&est, 0.1, ThresholdVariant::Iso).unwrap();
        assert_eq!(t.tau(), Tau::Score(2.0));
    }

    #[test]
    fn iso_variant_requires_isotonization() {
        assert!(matches!(
            select_threshold(&fixture(), 0.25, ThresholdVariant::Iso),
            Err(Error::IsotonizationRequired)
        ));
    }

    #[test]
    fn threshold_degenerates_to_flag_all_when_nothing_qualifies() {
        // alpha = 1 with q below 1/n: raw values are i/n, all above q. The
        // clean point sits above the mixture so no grid point evaluates to 0.
        let f0 = EmpiricalCdf::from_values(&[5.0]).unwrap();
        let fm = EmpiricalCdf::from_values(&[1.0, 2.0, 3.0]).unwrap();
        let est = AlienCdfEstimate::from_cdfs(&f0, &fm, 1.0).unwrap();
        let t = select_threshold(&est, 0.25, ThresholdVariant::Basic).unwrap();
        assert_eq!(t.tau(), Tau::FlagAll);
    }

    #[test]
    fn threshold_takes_grid_max_when_everything_qualifies() {
        let est =
            AlienCdfEstimate::from_raw_parts(vec![1.0, 2.0, 3.0], vec![0.05, 0.2, 0.3], 0.5)
                .unwrap();
        let t = select_threshold(&est, 0.5, ThresholdVariant::Basic).unwrap();
        assert_eq!(t.tau(), Tau::Score(3.0));
    }

    #[test]
    fn threshold_rejects_degenerate_q() {
        for bad in [0.0, 1.0, -0.1, 1.1, f64::NAN] {
            assert!(matches!(
                select_threshold(&fixture(), bad, ThresholdVariant::Basic),
                Err(Error::InvalidQuantile(_))
            ));
        }
    }

    #[test]
    fn alarms_are_strictly_above_the_threshold() {
        let t = DetectionThreshold::new(Tau::Score(4.0), 0.25, ThresholdVariant::Basic).unwrap();
        assert!(!t.alarm(4.0));
        assert!(t.alarm(4.0 + 1e-12));
        assert!(!t.alarm(-10.0));

        let all = DetectionThreshold::<f64>::new(Tau::FlagAll, 0.25, ThresholdVariant::Basic)
            .unwrap();
        assert!(all.alarm(f64::MIN));
    }

    #[test]
    fn classify_and_fraction_flagged_agree() {
        let scores = sample(&[1.0, 4.0, 4.5, 9.0]);
        let t = DetectionThreshold::new(Tau::Score(4.0), 0.25, ThresholdVariant::Basic).unwrap();
        assert_eq!(classify(&scores, &t), vec![false, false, true, true]);
        assert_eq!(fraction_flagged(&scores, &t).unwrap(), 0.5);

        // Threshold at the sample maximum: nothing alarms.
        let tmax = DetectionThreshold::new(Tau::Score(9.0), 0.25, ThresholdVariant::Basic).unwrap();
        assert_eq!(fraction_flagged(&scores, &tmax).unwrap(), 0.0);

        let all = DetectionThreshold::new(Tau::FlagAll, 0.25, ThresholdVariant::Basic).unwrap();
        assert_eq!(fraction_flagged(&scores, &all).unwrap(), 1.0);
        assert!(fraction_flagged(&sample(&[]), &all).is_err());
    }

    #[test]
    fn fit_threshold_composes_the_pipeline() {
        let clean = sample(&[1.0, 2.0, 3.0, 4.0]);
        let mixture = sample(&[2.0, 3.0, 5.0, 6.0]);
        let (est, t) =
            fit_threshold(&clean, &mixture, 0.5, 0.25, ThresholdVariant::Basic).unwrap();
        assert_eq!(t.tau(), Tau::Score(4.0));
        assert!(est.legal().is_none());

        let (est, t) = fit_threshold(&clean, &mixture, 0.5, 0.25, ThresholdVariant::Iso).unwrap();
        assert_eq!(t.tau(), Tau::Score(4.0));
        assert!(est.legal().is_some());
    }
}
