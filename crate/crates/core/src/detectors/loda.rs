//! Sparse random-projection histogram ensemble.
//!
//! Each ensemble member projects the data onto a sparse random direction
//! (`ceil(sqrt(d))` nonzero standard-normal entries, normalized to unit
//! length) and fits a fixed-width histogram to the projections of its own
//! bootstrap resample, with the Freedman-Diaconis rule picking the bin
//! width. A point's score is the mean negative log-density across members;
//! bins no resample point landed in get a pseudo-count of `1/n` so the
//! logarithm stays finite and emptiness is penalized smoothly.
//!
//! Bootstrapping per member is what enables honest training-row scores:
//! roughly `1/e` of the members exclude any given row, and only those score
//! it.

use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::AnomalyScorer;
use crate::error::{Error, Result};
use crate::point::PointSet;
use crate::seeds;
use crate::Real;

/// Training knobs. The default is the reference protocol: 1000 projections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LodaParams {
    pub n_projections: usize,
}

impl Default for LodaParams {
    fn default() -> Self {
        Self { n_projections: 1000 }
    }
}

impl LodaParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_projections < 1 {
            return Err(Error::Config("n_projections must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Largest bin count a single projection may use; guards degenerate
/// interquartile ranges from exploding the histogram.
const MAX_BINS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Projection<F> {
    /// Indices of the nonzero direction entries, sorted ascending.
    dims: Vec<u32>,
    /// Unit-norm weights aligned with `dims`.
    weights: Vec<F>,
    /// Left edge of bin 0.
    origin: f64,
    width: f64,
    counts: Vec<u32>,
    /// Sorted distinct training rows present in this member's bootstrap.
    in_bag: Vec<u32>,
}

impl<F: Real> Projection<F> {
    fn project(&self, row: &[F]) -> f64 {
        self.dims
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w.widen() * row[d as usize].widen())
            .sum()
    }

    /// Histogram density at `row`'s projection, with the `1/n` pseudo-count
    /// floor. `n` is the bootstrap sample size.
    fn density(&self, row: &[F], n: f64) -> f64 {
        let v = self.project(row);
        let offset = (v - self.origin) / self.width;
        let count = if offset >= 0.0 && offset < self.counts.len() as f64 {
            self.counts[offset as usize] as f64
        } else {
            0.0
        };
        count.max(1.0 / n) / (n * self.width)
    }
}

/// A trained projection-histogram ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loda<F> {
    projections: Vec<Projection<F>>,
    dim: usize,
    train_len: usize,
    params: LodaParams,
    seed: u64,
}

impl<F: Real> Loda<F>
where
    StandardNormal: Distribution<F>,
{
    /// Train on `data`, deriving per-member generators from `seed` so the
    /// result is identical whether members are built in parallel or one by
    /// one.
    pub fn train(data: &PointSet<F>, params: &LodaParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if data.is_empty() {
            return Err(Error::EmptySample("projection ensemble training set"));
        }
        let projections: Result<Vec<Projection<F>>> = (0..params.n_projections)
            .into_par_iter()
            .map(|p| {
                let mut rng = seeds::stream_rng(seed, p as u64);
                build_projection(&mut rng, data)
            })
            .collect();
        Ok(Self {
            projections: projections?,
            dim: data.dim(),
            train_len: data.n_rows(),
            params: *params,
            seed,
        })
    }
}

impl<F: Real> Loda<F> {
    pub fn n_projections(&self) -> usize {
        self.projections.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &LodaParams {
        &self.params
    }

    /// Sorted distinct training rows member `p`'s bootstrap contained, for
    /// audits.
    pub fn bootstrap_rows(&self, p: usize) -> &[u32] {
        &self.projections[p].in_bag
    }

    /// Mean negative log-density of each row across all members, in row
    /// order.
    pub fn score_rows(&self, points: &PointSet<F>) -> Result<Vec<F>> {
        if points.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: points.dim(),
            });
        }
        let n = self.train_len as f64;
        Ok((0..points.n_rows())
            .into_par_iter()
            .map(|i| {
                let row = points.row(i);
                let total: f64 = self
                    .projections
                    .iter()
                    .map(|p| -p.density(row, n).ln())
                    .sum();
                F::narrow(total / self.projections.len() as f64)
            })
            .collect())
    }

    /// Training-row scores using only the members whose bootstrap missed
    /// each row. `train` must be the point set the ensemble was trained on.
    pub fn held_out_rows(&self, train: &PointSet<F>) -> Result<Vec<F>> {
        if train.n_rows() != self.train_len || train.dim() != self.dim {
            return Err(Error::Config(
                "held-out scoring requires the exact training point set".to_string(),
            ));
        }
        let n = self.train_len as f64;
        (0..train.n_rows())
            .into_par_iter()
            .map(|i| {
                let row = train.row(i);
                let mut total = 0.0;
                let mut used = 0u64;
                for p in &self.projections {
                    if p.in_bag.binary_search(&(i as u32)).is_err() {
                        total += -p.density(row, n).ln();
                        used += 1;
                    }
                }
                if used == 0 {
                    return Err(Error::NeverHeldOut { row: i });
                }
                Ok(F::narrow(total / used as f64))
            })
            .collect()
    }
}

impl<F: Real> AnomalyScorer<F> for Loda<F> {
    fn score_rows(&self, points: &PointSet<F>) -> Result<Vec<F>> {
        Loda::score_rows(self, points)
    }

    fn held_out_rows(&self, train: &PointSet<F>) -> Result<Vec<F>> {
        Loda::held_out_rows(self, train)
    }
}

fn build_projection<F: Real>(rng: &mut ChaCha8Rng, data: &PointSet<F>) -> Result<Projection<F>>
where
    StandardNormal: Distribution<F>,
{
    let n = data.n_rows();
    let dim = data.dim();

    // Bootstrap resample: n draws with replacement, multiplicity kept for
    // the histogram, distinct sorted rows kept for leave-out checks.
    let mut draws: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();
    let mut in_bag = draws.clone();
    in_bag.sort_unstable();
    in_bag.dedup();

    // Sparse unit direction with ceil(sqrt(d)) nonzero entries.
    let k = (dim as f64).sqrt().ceil() as usize;
    let mut dims: Vec<u32> = rand::seq::index::sample(rng, dim, k)
        .into_iter()
        .map(|d| d as u32)
        .collect();
    dims.sort_unstable();
    let mut weights: Vec<F> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    let mut norm = weights.iter().map(|w| w.widen() * w.widen()).sum::<f64>().sqrt();
    while norm == 0.0 {
        for w in weights.iter_mut() {
            *w = rng.sample(StandardNormal);
        }
        norm = weights.iter().map(|w| w.widen() * w.widen()).sum::<f64>().sqrt();
    }
    for w in weights.iter_mut() {
        *w = F::narrow(w.widen() / norm);
    }

    let proto = Projection {
        dims,
        weights,
        origin: 0.0,
        width: 1.0,
        counts: Vec::new(),
        in_bag,
    };

    // Project the bootstrap sample and fit the fixed-width histogram.
    let mut values: Vec<f64> = draws.drain(..).map(|i| proto.project(data.row(i as usize))).collect();
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite projections"));
    let (lo, hi) = (values[0], values[n - 1]);
    let width = bin_width(&values, lo, hi);
    let n_bins = ((hi - lo) / width).floor() as usize + 1;
    let mut counts = vec![0u32; n_bins];
    for v in values {
        let b = ((v - lo) / width) as usize;
        counts[b.min(n_bins - 1)] += 1;
    }

    Ok(Projection {
        origin: lo,
        width,
        counts,
        ..proto
    })
}

/// Freedman-Diaconis width `2 * IQR / n^(1/3)` with nearest-rank quartiles,
/// falling back to `range / n^(1/3)` for zero interquartile range and to 1
/// for constant samples, and widened if needed to respect the bin cap.
fn bin_width(sorted: &[f64], lo: f64, hi: f64) -> f64 {
    let n = sorted.len();
    let rank = |p: f64| sorted[((p * n as f64).ceil() as usize).clamp(1, n) - 1];
    let iqr = rank(0.75) - rank(0.25);
    let cbrt = (n as f64).cbrt();
    let range = hi - lo;
    let mut width = 2.0 * iqr / cbrt;
    if width <= 0.0 {
        width = range / cbrt;
    }
    if width <= 0.0 {
        width = 1.0;
    }
    if range / width > MAX_BINS {
        width = range / MAX_BINS;
    }
    width
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(values: &[f64]) -> PointSet<f64> {
        PointSet::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    fn nine_dim_cluster(n: usize) -> PointSet<f64> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..9).map(|d| ((i * 9 + d) as f64 * 0.618).sin()).collect())
            .collect();
        PointSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn one_dimensional_directions_are_unit_signs() {
        let data = one_dim(&[0.0, 0.5, 1.0, 1.5]);
        let l = Loda::train(&data, &LodaParams { n_projections: 16 }, 3).unwrap();
        for p in &l.projections {
            assert_eq!(p.dims, vec![0]);
            assert!((p.weights[0].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn directions_have_root_d_nonzeros_and_unit_norm() {
        let data = nine_dim_cluster(30);
        let l = Loda::train(&data, &LodaParams { n_projections: 25 }, 5).unwrap();
        for p in &l.projections {
            assert_eq!(p.dims.len(), 3, "ceil(sqrt(9)) nonzero entries");
            assert!(p.dims.windows(2).all(|w| w[0] < w[1]));
            let norm: f64 = p.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_mass_matches_the_bootstrap_size() {
        let data = nine_dim_cluster(40);
        let l = Loda::train(&data, &LodaParams { n_projections: 10 }, 7).unwrap();
        for p in &l.projections {
            let total: u32 = p.counts.iter().sum();
            assert_eq!(total as usize, 40, "every bootstrap draw lands in a bin");
            assert!(!p.in_bag.is_empty());
            assert!(p.in_bag.len() <= 40);
            assert!(p.in_bag.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn empty_regions_score_above_dense_regions() {
        let values: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
        let data = one_dim(&values);
        let l = Loda::train(&data, &LodaParams { n_projections: 100 }, 11).unwrap();
        let probe = one_dim(&[0.5, 1000.0]);
        let scores = l.score_rows(&probe).unwrap();
        assert!(
            scores[1] > scores[0],
            "far point {} should beat in-cluster {}",
            scores[1],
            scores[0]
        );
    }

    #[test]
    fn constant_data_gives_zero_in_cluster_score() {
        let data = one_dim(&[4.0; 20]);
        let l = Loda::train(&data, &LodaParams { n_projections: 10 }, 13).unwrap();
        let probe = one_dim(&[4.0, 400.0]);
        let scores = l.score_rows(&probe).unwrap();
        // All mass in one unit-width bin: density 1, -ln(1) = 0.
        assert!(scores[0].abs() < 1e-12, "got {}", scores[0]);
        assert!(scores[1] > 0.0);
    }

    #[test]
    fn single_outlier_among_duplicates_scores_highest() {
        let data = one_dim(&[0.0, 0.0, 0.0, 10.0]);
        let l = Loda::train(&data, &LodaParams { n_projections: 200 }, 17).unwrap();
        let scores = l.score_rows(&data).unwrap();
        assert!(scores[3] > scores[0], "{} vs {}", scores[3], scores[0]);
    }

    #[test]
    fn training_is_deterministic_in_the_seed() {
        let data = nine_dim_cluster(25);
        let params = LodaParams { n_projections: 12 };
        let a = Loda::train(&data, &params, 19).unwrap();
        let b = Loda::train(&data, &params, 19).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Loda::train(&data, &params, 20).unwrap());
    }

    #[test]
    fn held_out_scores_use_only_excluding_members() {
        let data = nine_dim_cluster(30);
        let l = Loda::train(&data, &LodaParams { n_projections: 50 }, 23).unwrap();
        let held = l.held_out_rows(&data).unwrap();

        let row = data.row(6);
        let mut total = 0.0;
        let mut used = 0u64;
        for p in &l.projections {
            if !p.in_bag.contains(&6) {
                total += -p.density(row, 30.0).ln();
                used += 1;
            }
        }
        assert!(used > 0, "some bootstrap should miss row 6");
        assert!((held[6] - total / used as f64).abs() < 1e-12);
    }

    #[test]
    fn single_row_training_set_cannot_be_held_out() {
        let data = one_dim(&[1.0]);
        let l = Loda::train(&data, &LodaParams { n_projections: 5 }, 29).unwrap();
        assert!(matches!(
            l.held_out_rows(&data),
            Err(Error::NeverHeldOut { row: 0 })
        ));
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let data = one_dim(&[1.0, 2.0]);
        assert!(Loda::train(&data, &LodaParams { n_projections: 0 }, 1).is_err());
        let empty = PointSet::from_flat(Vec::<f64>::new(), 1).unwrap();
        assert!(matches!(
            Loda::train(&empty, &LodaParams::default(), 1),
            Err(Error::EmptySample(_))
        ));

        let l = Loda::train(&data, &LodaParams { n_projections: 2 }, 1).unwrap();
        let wrong = PointSet::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            l.score_rows(&wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn serialization_round_trips() {
        let data = nine_dim_cluster(20);
        let l = Loda::train(&data, &LodaParams { n_projections: 6 }, 31).unwrap();
        let json = serde_json::to_string(&l).unwrap();
        let back: Loda<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(l, back);
        assert_eq!(l.score_rows(&data).unwrap(), back.score_rows(&data).unwrap());
    }

    #[test]
    fn f32_ensemble_trains_and_scores() {
        let rows: Vec<Vec<f32>> = (0..20).map(|i| vec![i as f32 * 0.1, -(i as f32)]).collect();
        let data = PointSet::from_rows(&rows).unwrap();
        let l = Loda::train(&data, &LodaParams { n_projections: 8 }, 37).unwrap();
        let scores = l.score_rows(&data).unwrap();
        assert_eq!(scores.len(), 20);
        assert!(scores.iter().all(|s| s.is_finite()));
    }
}
