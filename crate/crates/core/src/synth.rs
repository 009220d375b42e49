//! Synthetic benchmark generator.
//!
//! Nominal points are standard normal in every dimension. Alien points draw
//! a shift pattern (how many dimensions to displace), pick that many
//! dimensions uniformly at random, and shift each chosen dimension's mean
//! by a fixed amount. The default configuration is the 9-dimensional
//! benchmark: with probability 0.4 shift 3 dimensions, with probability 0.6
//! shift 4, each shifted dimension moving from N(0,1) to N(3,1).

use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{Label, LabeledPointSet, PointSet};
use crate::seeds;
use crate::Real;

/// One way an alien point can deviate: shift `shifted_dims` randomly chosen
/// dimensions, selected with probability `probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPattern {
    pub probability: f64,
    pub shifted_dims: usize,
}

/// Generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Feature dimensionality.
    pub dim: usize,
    /// Mean displacement applied to each shifted dimension.
    pub shift: f64,
    /// Mixture of shift patterns; probabilities must sum to 1.
    pub patterns: Vec<ShiftPattern>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            dim: 9,
            shift: 3.0,
            patterns: vec![
                ShiftPattern {
                    probability: 0.4,
                    shifted_dims: 3,
                },
                ShiftPattern {
                    probability: 0.6,
                    shifted_dims: 4,
                },
            ],
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".to_string()));
        }
        if !self.shift.is_finite() {
            return Err(Error::Config(format!("shift must be finite, got {}", self.shift)));
        }
        if self.patterns.is_empty() {
            return Err(Error::Config("at least one shift pattern is required".to_string()));
        }
        let mut total = 0.0;
        for p in &self.patterns {
            if !p.probability.is_finite() || p.probability < 0.0 {
                return Err(Error::Config(format!(
                    "pattern probability must be nonnegative, got {}",
                    p.probability
                )));
            }
            if p.shifted_dims == 0 || p.shifted_dims > self.dim {
                return Err(Error::Config(format!(
                    "pattern must shift between 1 and {} dimensions, got {}",
                    self.dim, p.shifted_dims
                )));
            }
            total += p.probability;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "pattern probabilities must sum to 1, got {total}"
            )));
        }
        Ok(())
    }
}

/// How aliens are placed into a contaminated sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureMode {
    /// Exactly `round(alpha * n)` aliens at shuffled positions.
    ExactCount,
    /// Each row is alien independently with probability `alpha`.
    Iid,
}

/// Alien points together with the dimensions each one shifted, kept for
/// generator audits; detectors never see the masks.
#[derive(Debug, Clone, PartialEq)]
pub struct AlienBatch<F> {
    pub points: PointSet<F>,
    pub shift_masks: Vec<Vec<usize>>,
}

/// Draw `n` nominal points.
pub fn gen_nominal<F: Real>(n: usize, cfg: &SynthConfig, seed: u64) -> Result<PointSet<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    let mut rng = seeds::rng(seed);
    let mut data = Vec::with_capacity(n * cfg.dim);
    for _ in 0..n * cfg.dim {
        data.push(rng.sample(StandardNormal));
    }
    PointSet::from_flat(data, cfg.dim)
}

/// Draw `n` alien points, recording each point's shifted dimensions.
pub fn gen_alien<F: Real>(n: usize, cfg: &SynthConfig, seed: u64) -> Result<AlienBatch<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    let mut rng = seeds::rng(seed);
    let mut data = Vec::with_capacity(n * cfg.dim);
    let mut masks = Vec::with_capacity(n);
    for _ in 0..n {
        masks.push(alien_row(&mut rng, cfg, &mut data));
    }
    Ok(AlienBatch {
        points: PointSet::from_flat(data, cfg.dim)?,
        shift_masks: masks,
    })
}

/// Draw a contaminated sample of `n` points with alien fraction `alpha`.
pub fn gen_mixture<F: Real>(
    n: usize,
    alpha: f64,
    mode: MixtureMode,
    cfg: &SynthConfig,
    seed: u64,
) -> Result<LabeledPointSet<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let mut rng = seeds::rng(seed);
    let labels: Vec<Label> = match mode {
        MixtureMode::ExactCount => {
            let k = ((alpha * n as f64).round() as usize).min(n);
            let mut labels = vec![Label::Alien; k];
            labels.extend(std::iter::repeat_n(Label::Nominal, n - k));
            labels.shuffle(&mut rng);
            labels
        }
        MixtureMode::Iid => (0..n)
            .map(|_| {
                if rng.random::<f64>() < alpha {
                    Label::Alien
                } else {
                    Label::Nominal
                }
            })
            .collect(),
    };

    let mut data = Vec::with_capacity(n * cfg.dim);
    for &label in &labels {
        match label {
            Label::Nominal => {
                for _ in 0..cfg.dim {
                    data.push(rng.sample(StandardNormal));
                }
            }
            Label::Alien => {
                alien_row(&mut rng, cfg, &mut data);
            }
        }
    }
    LabeledPointSet::new(PointSet::from_flat(data, cfg.dim)?, labels)
}

/// Append one alien row to `data` and return its sorted shift mask.
fn alien_row<F: Real>(rng: &mut ChaCha8Rng, cfg: &SynthConfig, data: &mut Vec<F>) -> Vec<usize>
where
    StandardNormal: Distribution<F>,
{
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = cfg.patterns.len() - 1;
    for (i, p) in cfg.patterns.iter().enumerate() {
        acc += p.probability;
        if u < acc {
            chosen = i;
            break;
        }
    }
    let k = cfg.patterns[chosen].shifted_dims;
    let mut mask = rand::seq::index::sample(rng, cfg.dim, k).into_vec();
    mask.sort_unstable();

    let shift = F::narrow(cfg.shift);
    let start = data.len();
    for _ in 0..cfg.dim {
        data.push(rng.sample(StandardNormal));
    }
    for &d in &mask {
        data[start + d] = data[start + d] + shift;
    }
    mask
}
