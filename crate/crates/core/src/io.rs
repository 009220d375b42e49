//! Versioned persistence for thresholds and trained models.
//!
//! Both file kinds are JSON with an explicit `format` marker and `version`
//! number, so a loader can reject foreign or future files with a clear
//! error instead of misreading them. Thresholds additionally record the
//! parameters they were fitted with and, optionally, SHA-256 digests of the
//! score files they came from, so a saved threshold can be traced back to
//! its inputs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cdf::{DetectionThreshold, Tau, ThresholdVariant};
use crate::detectors::iforest::IsoForest;
use crate::detectors::loda::Loda;
use crate::detectors::AnomalyScorer;
use crate::error::{Error, Result};
use crate::point::PointSet;

pub const THRESHOLD_FORMAT: &str = "opencat-threshold";
pub const MODEL_FORMAT: &str = "opencat-model";
pub const FORMAT_VERSION: u32 = 1;

/// SHA-256 digest of a file, as lowercase hex.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 8192];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

/// Digests of the score files a threshold was fitted from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub clean_sha256: String,
    pub mixture_sha256: String,
}

/// A fitted threshold plus the parameters behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRecord {
    pub threshold: DetectionThreshold<f64>,
    /// Alien fraction the estimate was fitted with.
    pub alpha: f64,
    pub provenance: Option<Provenance>,
}

/// On-disk shape; `tau` is either a number or the literal `"flag_all"`.
#[derive(Serialize, Deserialize)]
struct ThresholdFile {
    format: String,
    version: u32,
    tau: TauField,
    q: f64,
    variant: ThresholdVariant,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TauField {
    Number(f64),
    Sentinel(String),
}

impl TauField {
    fn to_tau(&self) -> Result<Tau<f64>> {
        match self {
            TauField::Number(v) if v.is_finite() => Ok(Tau::Score(*v)),
            TauField::Number(v) => Err(Error::NonFinite {
                context: "stored threshold",
                value: *v,
            }),
            TauField::Sentinel(s) if s == "flag_all" => Ok(Tau::FlagAll),
            TauField::Sentinel(s) => Err(Error::Format(format!(
                "tau must be a number or \"flag_all\", got \"{s}\""
            ))),
        }
    }
}

impl From<Tau<f64>> for TauField {
    fn from(tau: Tau<f64>) -> Self {
        match tau {
            Tau::Score(v) => TauField::Number(v),
            Tau::FlagAll => TauField::Sentinel("flag_all".to_string()),
        }
    }
}

fn check_header(path: &Path, format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::Format(format!(
            "{} is not a {expected} file (format marker \"{format}\")",
            path.display()
        )));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{} has version {version}, this build reads version {FORMAT_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

/// Write a threshold file.
pub fn save_threshold(path: &Path, record: &ThresholdRecord) -> Result<()> {
    crate::cdf::validate_alpha(record.alpha)?;
    let file = ThresholdFile {
        format: THRESHOLD_FORMAT.to_string(),
        version: FORMAT_VERSION,
        tau: record.threshold.tau().into(),
        q: record.threshold.q(),
        variant: record.threshold.variant(),
        alpha: record.alpha,
        provenance: record.provenance.clone(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &file)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Read a threshold file, rejecting wrong formats and versions.
pub fn load_threshold(path: &Path) -> Result<ThresholdRecord> {
    let file: ThresholdFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    check_header(path, &file.format, file.version, THRESHOLD_FORMAT)?;
    crate::cdf::validate_alpha(file.alpha)?;
    Ok(ThresholdRecord {
        threshold: DetectionThreshold::new(file.tau.to_tau()?, file.q, file.variant)?,
        alpha: file.alpha,
        provenance: file.provenance,
    })
}

/// A trained detector of either kind, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    IsolationForest(IsoForest<f64>),
    Loda(Loda<f64>),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::IsolationForest(_) => "isolation_forest",
            Model::Loda(_) => "loda",
        }
    }

    pub fn as_scorer(&self) -> &dyn AnomalyScorer<f64> {
        match self {
            Model::IsolationForest(m) => m,
            Model::Loda(m) => m,
        }
    }
}

impl AnomalyScorer<f64> for Model {
    fn score_rows(&self, points: &PointSet<f64>) -> Result<Vec<f64>> {
        self.as_scorer().score_rows(points)
    }

    fn held_out_rows(&self, train: &PointSet<f64>) -> Result<Vec<f64>> {
        self.as_scorer().held_out_rows(train)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Model,
}

/// Write a trained model.
pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: FORMAT_VERSION,
        model: model.clone(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Read a trained model, rejecting wrong formats and versions.
pub fn load_model(path: &Path) -> Result<Model> {
    let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    check_header(path, &file.format, file.version, MODEL_FORMAT)?;
    Ok(file.model)
}
