//! Open category detection with distribution-free guarantees.
//!
//! Given a clean sample of nominal data and a contaminated sample containing
//! an unknown mix of nominal and alien points, this crate estimates the alien
//! score distribution by inverting the mixture relationship between the two
//! empirical CDFs, selects an alarm threshold that caps the alien miss rate
//! at a target quantile, and computes the sample sizes required for that cap
//! to hold with prescribed confidence.
//!
//! The pieces:
//!
//! - [`cdf`]: empirical CDFs, the mixture-inverted alien CDF estimate, and
//!   threshold selection (raw or isotonized estimates).
//! - [`isotonic`]: least-squares non-decreasing regression (pool adjacent
//!   violators).
//! - [`bounds`]: required-sample-size and achieved-tolerance calculators,
//!   the DKW-type tail bound, and the stochastic-dominance admissibility
//!   check for deliberately inflated alien fractions.
//! - [`detectors`]: isolation forest and sparse random-projection histogram
//!   ensembles, both with held-out scoring for their own training rows.
//! - [`synth`]: the 9-dimensional Gaussian benchmark generator.
//! - [`harness`]: repeated-trial experiments, guarantee verification,
//!   cross-validated benchmarks on labeled data, and alien-fraction sweeps.
//! - [`io`]: versioned JSON persistence for thresholds and trained models.
//!
//! Scores and features are generic over the scalar type through the [`Real`]
//! trait (instantiable at `f32` or `f64`); probabilities and CDF values are
//! always `f64`. The aliases below fix the common double-precision case.

use std::fmt::{Debug, Display};

use rand::distr::uniform::SampleUniform;

pub mod bounds;
pub mod cdf;
pub mod detectors;
mod error;
pub mod harness;
pub mod io;
pub mod isotonic;
pub mod point;
pub mod sample;
pub mod seeds;
pub mod synth;

pub use error::{Error, Result};

/// Scalar type for scores and feature values.
///
/// Implemented for `f32` and `f64`. Everything probabilistic (CDF values,
/// alien fractions, quantile levels) stays `f64` regardless of `F`; this
/// trait only parameterizes the data being thresholded.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumCast
    + SampleUniform
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Widening to `f64` for CDF arithmetic.
    fn widen(self) -> f64 {
        self.to_f64().expect("scalar widens to f64")
    }

    /// Narrowing from `f64`, used when parsing text scores.
    fn narrow(v: f64) -> Self {
        num_traits::FromPrimitive::from_f64(v).expect("f64 narrows to scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Double-precision empirical CDF.
pub type EmpiricalCdf = cdf::EmpiricalCdf<f64>;
/// Double-precision alien CDF estimate.
pub type AlienCdfEstimate = cdf::AlienCdfEstimate<f64>;
/// Double-precision detection threshold.
pub type DetectionThreshold = cdf::DetectionThreshold<f64>;
/// Double-precision score sample.
pub type ScoreSample = sample::ScoreSample<f64>;
/// Double-precision point set.
pub type PointSet = point::PointSet<f64>;
/// Double-precision labeled point set.
pub type LabeledPointSet = point::LabeledPointSet<f64>;
/// Double-precision isolation forest.
pub type IsoForest = detectors::iforest::IsoForest<f64>;
/// Double-precision projection-histogram ensemble.
pub type Loda = detectors::loda::Loda<f64>;
