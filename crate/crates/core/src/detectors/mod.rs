//! Anomaly detectors with held-out scoring for their own training data.
//!
//! Both detectors are ensembles whose members train on randomized subsets
//! of the data, which is what makes honest scores for the training rows
//! possible: a training row is scored only by the ensemble members that
//! never saw it. Evaluation and mixture rows are scored by the full
//! ensemble.

pub mod iforest;
pub mod loda;

use crate::error::Result;
use crate::point::PointSet;
use crate::sample::{ScoreSample, ScoreSource};
use crate::Real;

/// A trained detector: higher scores mean more anomalous.
pub trait AnomalyScorer<F: Real>: Send + Sync {
    /// Score each row of `points` with the full ensemble, in row order.
    fn score_rows(&self, points: &PointSet<F>) -> Result<Vec<F>>;

    /// Score each training row using only the ensemble members that did not
    /// train on it. `train` must be the exact point set used for training.
    fn held_out_rows(&self, train: &PointSet<F>) -> Result<Vec<F>>;
}

/// Full-ensemble scores packaged as a sample.
pub fn score_sample<F: Real, D: AnomalyScorer<F> + ?Sized>(
    detector: &D,
    points: &PointSet<F>,
    source: ScoreSource,
) -> Result<ScoreSample<F>> {
    ScoreSample::new(detector.score_rows(points)?, source)
}

/// Held-out scores for the training set, packaged as a clean sample.
pub fn held_out_sample<F: Real, D: AnomalyScorer<F> + ?Sized>(
    detector: &D,
    train: &PointSet<F>,
) -> Result<ScoreSample<F>> {
    ScoreSample::new(detector.held_out_rows(train)?, ScoreSource::Clean)
}
