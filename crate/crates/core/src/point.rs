//! Feature-vector storage and labeled datasets.
//!
//! Labels travel in [`LabeledPointSet`], which hands detectors and CDF
//! estimators only its unlabeled [`PointSet`] view; nothing downstream of
//! data generation can branch on ground truth except the evaluation code
//! that explicitly asks for labels.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Dense row-major matrix of feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet<F> {
    data: Vec<F>,
    dim: usize,
}

impl<F: Real> PointSet<F> {
    /// Build from rows, checking finiteness and a consistent dimension.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if !rows.is_empty() && dim == 0 {
            return Err(Error::Config("points need at least one dimension".to_string()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim.max(1))
    }

    /// Build from a flat row-major buffer of `n * dim` values.
    pub fn from_flat(data: Vec<F>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("points need at least one dimension".to_string()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "point set",
                value: bad.widen(),
            });
        }
        Ok(Self { data, dim })
    }

    pub fn n_rows(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[F]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// New point set containing the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            dim: self.dim,
        }
    }
}

/// Ground-truth class of a generated or annotated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Nominal,
    Alien,
}

impl Label {
    pub fn is_alien(self) -> bool {
        matches!(self, Label::Alien)
    }
}

/// Points with per-row ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPointSet<F> {
    points: PointSet<F>,
    labels: Vec<Label>,
}

impl<F: Real> LabeledPointSet<F> {
    pub fn new(points: PointSet<F>, labels: Vec<Label>) -> Result<Self> {
        if points.n_rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: points.n_rows(),
                got: labels.len(),
            });
        }
        Ok(Self { points, labels })
    }

    /// The unlabeled view handed to detectors and estimators.
    pub fn points(&self) -> &PointSet<F> {
        &self.points
    }

    /// Ground truth, for evaluation only.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_alien(&self) -> usize {
        self.labels.iter().filter(|l| l.is_alien()).count()
    }

    pub fn n_nominal(&self) -> usize {
        self.labels.len() - self.n_alien()
    }
}

/// How to derive binary labels from a CSV.
#[derive(Debug, Clone)]
pub enum LabelRule {
    /// A column holding literal `0` (nominal) or `1` (alien).
    BinaryColumn(String),
    /// A categorical column plus the set of class names counted as nominal;
    /// all other classes are alien.
    ClassColumn {
        column: String,
        nominal: Vec<String>,
    },
}

/// Write points as CSV with feature columns `f0..f{d-1}` and, when labels
/// are given, a trailing `label` column of `0`/`1`.
pub fn write_points_csv<F: Real>(
    path: &Path,
    points: &PointSet<F>,
    labels: Option<&[Label]>,
) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != points.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: points.n_rows(),
                got: l.len(),
            });
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..points.dim()).map(|i| format!("f{i}")).collect();
    if labels.is_some() {
        header.push("label".to_string());
    }
    w.write_record(&header)?;
    for (i, row) in points.rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            record.push(if l[i].is_alien() { "1" } else { "0" }.to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a feature CSV. Every column except `label` is a feature; a `label`
/// column, when present, is returned alongside the points.
pub fn read_points_csv<F: Real>(path: &Path) -> Result<(PointSet<F>, Option<Vec<Label>>)> {
    let text = fs::read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let label_col = headers.iter().position(|h| h.trim() == "label");
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|i| Some(*i) != label_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "CSV has no feature columns".to_string(),
        });
    }

    let mut data: Vec<F> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record?;
        for &c in &feature_cols {
            let field = record.get(c).ok_or_else(|| Error::Parse {
                line,
                message: "row is shorter than the header".to_string(),
            })?;
            let value: f64 = field.trim().parse().map_err(|e| Error::Parse {
                line,
                message: format!("bad feature value {field:?} ({e})"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite feature value {value}"),
                });
            }
            data.push(F::narrow(value));
        }
        if let Some(c) = label_col {
            let field = record.get(c).unwrap_or("").trim();
            labels.push(parse_binary_label(field, line)?);
        }
    }
    let points = PointSet::from_flat(data, feature_cols.len())?;
    Ok((points, label_col.map(|_| labels)))
}

/// Read a feature CSV and derive labels per `rule`. The label-bearing
/// column is excluded from the features.
pub fn read_labeled_csv<F: Real>(path: &Path, rule: &LabelRule) -> Result<LabeledPointSet<F>> {
    let column = match rule {
        LabelRule::BinaryColumn(c) => c.as_str(),
        LabelRule::ClassColumn { column, .. } => column.as_str(),
    };
    let text = fs::read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let label_col = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("CSV has no `{column}` column"),
        })?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|i| *i != label_col).collect();
    if feature_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "CSV has no feature columns".to_string(),
        });
    }

    let mut data: Vec<F> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record?;
        for &c in &feature_cols {
            let field = record.get(c).ok_or_else(|| Error::Parse {
                line,
                message: "row is shorter than the header".to_string(),
            })?;
            let value: f64 = field.trim().parse().map_err(|e| Error::Parse {
                line,
                message: format!("bad feature value {field:?} ({e})"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite feature value {value}"),
                });
            }
            data.push(F::narrow(value));
        }
        let field = record.get(label_col).unwrap_or("").trim();
        let label = match rule {
            LabelRule::BinaryColumn(_) => parse_binary_label(field, line)?,
            LabelRule::ClassColumn { nominal, .. } => {
                if nominal.iter().any(|n| n == field) {
                    Label::Nominal
                } else {
                    Label::Alien
                }
            }
        };
        labels.push(label);
    }
    LabeledPointSet::new(PointSet::from_flat(data, feature_cols.len())?, labels)
}

fn parse_binary_label(field: &str, line: usize) -> Result<Label> {
    match field {
        "0" => Ok(Label::Nominal),
        "1" => Ok(Label::Alien),
        other => Err(Error::Parse {
            line,
            message: format!("label must be 0 or 1, got {other:?}"),
        }),
    }
}
