//! Sample-size guarantees for the threshold's quantile cap.
//!
//! With both samples of size `n`, the fitted threshold misses at most a
//! `q + epsilon` fraction of aliens with probability at least `1 - delta`
//! whenever `n` exceeds
//!
//! ```text
//! (1/2) * ln(2 / (1 - sqrt(1 - delta))) * (1/epsilon)^2 * ((2 - a) / a)^2
//! ```
//!
//! where `a` is the alien fraction assumed during fitting. The same formula
//! covers a deliberately inflated fraction `a = alpha' >= alpha`, provided
//! the clean CDF dominates the mixture CDF everywhere (the admissibility
//! condition checked here). The two-sided empirical-process tail bound that
//! drives the formula is exposed as [`massart_bound`].

use serde::{Deserialize, Serialize};

use crate::cdf::{validate_alpha, validate_quantile, EmpiricalCdf};
use crate::error::{Error, Result};
use crate::Real;

/// Parameters of the coverage guarantee.
///
/// `alpha` is the believed alien fraction of the contaminated sample;
/// `alpha_prime`, when present, is the inflated fraction actually used for
/// fitting and must be at least `alpha`. The guarantee is on the alien
/// quantile level `q` with tolerance `epsilon` and failure probability
/// `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacParams {
    pub alpha: f64,
    pub alpha_prime: Option<f64>,
    pub q: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl PacParams {
    pub fn new(
        alpha: f64,
        alpha_prime: Option<f64>,
        q: f64,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            alpha_prime,
            q,
            epsilon,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        if let Some(ap) = self.alpha_prime {
            if !(ap >= self.alpha && ap <= 1.0) {
                return Err(Error::Config(format!(
                    "alpha_prime must lie in [alpha, 1] = [{}, 1], got {ap}",
                    self.alpha
                )));
            }
        }
        validate_quantile(self.q)?;
        validate_delta(self.delta)?;
        let limit = 1.0 - self.q;
        if !(self.epsilon > 0.0 && self.epsilon < limit) {
            return Err(Error::InvalidEpsilon {
                epsilon: self.epsilon,
                limit,
            });
        }
        Ok(())
    }

    /// The alien fraction the fit assumes: `alpha_prime` when set.
    pub fn fitting_alpha(&self) -> f64 {
        self.alpha_prime.unwrap_or(self.alpha)
    }

    /// Guaranteed miss-rate ceiling `q + epsilon`.
    pub fn eta(&self) -> f64 {
        self.q + self.epsilon
    }
}

pub(crate) fn validate_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

/// `ln(2 / (1 - sqrt(1 - delta)))`, the confidence term shared by both
/// calculator directions.
fn confidence_term(delta: f64) -> f64 {
    (2.0 / (1.0 - (1.0 - delta).sqrt())).ln()
}

/// Smallest per-sample size `n` for which the guarantee holds.
///
/// The inequality is strict, so a bound landing exactly on an integer still
/// rounds up to the next one. Errors if the result overflows `u64` (the
/// parameters are then far outside any practical regime).
pub fn required_sample_size(params: &PacParams) -> Result<u64> {
    params.validate()?;
    let a = params.fitting_alpha();
    let ratio = (2.0 - a) / a;
    let rhs = 0.5 * confidence_term(params.delta) * (ratio / params.epsilon).powi(2);
    if !rhs.is_finite() || rhs >= u64::MAX as f64 {
        return Err(Error::Config(format!(
            "required sample size overflows: bound is {rhs:e}"
        )));
    }
    let ceil = rhs.ceil();
    Ok(if ceil == rhs { ceil as u64 + 1 } else { ceil as u64 })
}

/// Tolerance actually guaranteed by samples of size `n`.
///
/// Inverts the sample-size bound: the returned `epsilon` satisfies the
/// guarantee with failure probability `delta` at the given alien fraction.
/// `n` is real-valued so the inversion is exact rather than floored; pass
/// integer sizes as floats. Note the result is only meaningful as a
/// quantile tolerance when it is below `1 - q` for the `q` in use.
pub fn achieved_epsilon(n: f64, delta: f64, alpha: f64) -> Result<f64> {
    if !n.is_finite() || n <= 0.0 {
        return Err(Error::Config(format!("sample size must be positive, got {n}")));
    }
    validate_delta(delta)?;
    validate_alpha(alpha)?;
    Ok((2.0 - alpha) / alpha * (confidence_term(delta) / (2.0 * n)).sqrt())
}

/// A query against the two-sided empirical-process tail.
///
/// `lambda` is the deviation level in the scaled process
/// `sqrt(n) * sup |F_n - F|`; `n` records the sample size of that process
/// for context, the bound itself is scale-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassartQuery {
    pub lambda: f64,
    pub n: u64,
}

/// Value of the tail bound `2 * exp(-2 * lambda^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassartBound {
    /// The bound as written; exceeds 1 for small `lambda`.
    pub raw: f64,
    /// The bound clamped to `[0, 1]`, usable as a probability.
    pub clamped: f64,
}

/// Tight constant-2 bound on the probability that the scaled empirical
/// process deviation exceeds `lambda`.
pub fn massart_bound(query: &MassartQuery) -> Result<MassartBound> {
    if !query.lambda.is_finite() || query.lambda < 0.0 {
        return Err(Error::Config(format!(
            "lambda must be a nonnegative real, got {}",
            query.lambda
        )));
    }
    if query.n == 0 {
        return Err(Error::Config("sample size must be positive".to_string()));
    }
    let raw = 2.0 * (-2.0 * query.lambda * query.lambda).exp();
    Ok(MassartBound {
        raw,
        clamped: raw.min(1.0),
    })
}

/// Outcome of the stochastic-dominance check that licenses an inflated
/// alien fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// True when the clean CDF is at least the mixture CDF on the whole
    /// union grid.
    pub admissible: bool,
    /// Largest amount by which the mixture CDF exceeds the clean CDF;
    /// zero when admissible.
    pub max_violation: f64,
}

/// Check `F0(x) >= Fm(x)` at every point of the union grid.
///
/// When this holds, fitting with any inflated fraction `alpha' >= alpha`
/// can only lower the threshold, trading false positives for recall without
/// voiding the quantile guarantee.
pub fn check_admissibility<F: Real>(
    clean: &EmpiricalCdf<F>,
    mixture: &EmpiricalCdf<F>,
) -> AdmissibilityReport {
    let mut max_violation: f64 = 0.0;
    for &g in crate::cdf::union_grid(clean, mixture).iter() {
        max_violation = max_violation.max(mixture.eval(g) - clean.eval(g));
    }
    AdmissibilityReport {
        admissible: max_violation <= 0.0,
        max_violation,
    }
}
