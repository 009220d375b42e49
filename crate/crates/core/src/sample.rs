//! Score samples and score-file parsing.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Which pipeline stage a sample came from. Metadata only; no operation
/// branches on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    /// Scores of the clean nominal sample.
    Clean,
    /// Scores of the contaminated sample.
    Mixture,
    /// Scores of an evaluation pool or an external detector.
    External,
}

/// A batch of anomaly scores, held sorted ascending.
///
/// Construction rejects non-finite values. Emptiness is legal here and
/// rejected by the operations that cannot tolerate it (CDF construction,
/// threshold fitting), so callers can distinguish "no input" from "bad
/// input".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample<F> {
    values: Vec<F>,
    source: ScoreSource,
}

impl<F: Real> ScoreSample<F> {
    /// Build a sample from scores in any order.
    pub fn new(mut values: Vec<F>, source: ScoreSource) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "score sample",
                value: bad.widen(),
            });
        }
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite scores compare"));
        Ok(Self { values, source })
    }

    /// Scores in ascending order.
    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn source(&self) -> ScoreSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest score, if any.
    pub fn max(&self) -> Option<F> {
        self.values.last().copied()
    }

    /// Smallest score, if any.
    pub fn min(&self) -> Option<F> {
        self.values.first().copied()
    }

    /// Number of scores strictly greater than `threshold`.
    ///
    /// O(log n) thanks to the sorted representation.
    pub fn count_above(&self, threshold: F) -> usize {
        self.values.len() - self.values.partition_point(|v| *v <= threshold)
    }

    /// Read a score file: either one decimal score per line, or a CSV with a
    /// `score` column (sniffed from the first line).
    pub fn from_file(path: &Path, source: ScoreSource) -> Result<Self> {
        let raw = read_scores(path)?;
        Self::new(raw.into_iter().map(F::narrow).collect(), source)
    }
}

/// Parse a score file preserving input order.
///
/// Two layouts are accepted. If the first non-empty line parses as a number
/// the file is one score per line; otherwise it must be a CSV whose header
/// names a `score` column. Parse failures and non-finite values report their
/// 1-based line number.
pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let Some(first) = first else {
        return Err(Error::EmptySample("score file has no data"));
    };
    if first.trim().parse::<f64>().is_ok() {
        parse_plain_scores(&text)
    } else {
        parse_csv_scores(&text)
    }
}

fn parse_plain_scores(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("expected a decimal score, got {trimmed:?} ({e})"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("non-finite score {value}"),
            });
        }
        out.push(value);
    }
    Ok(out)
}

fn parse_csv_scores(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let score_col = headers
        .iter()
        .position(|h| h.trim() == "score")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "CSV score file needs a `score` column".to_string(),
        })?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record?;
        let field = record.get(score_col).ok_or_else(|| Error::Parse {
            line,
            message: "row is missing the score column".to_string(),
        })?;
        let value: f64 = field.trim().parse().map_err(|e| Error::Parse {
            line,
            message: format!("expected a decimal score, got {field:?} ({e})"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite score {value}"),
            });
        }
        out.push(value);
    }
    Ok(out)
}
