//! One module per subcommand, each exposing clap `Args` and `run`.

pub mod bounds;
pub mod cv;
pub mod experiment;
pub mod score;
pub mod synth;
pub mod sweep;
pub mod threshold;
pub mod train;

use std::path::Path;

use anyhow::Context;

use opencat_core::cdf::Tau;
use opencat_core::harness::{DetectorConfig, VariantChoice};

/// The `--variant` flag shared by fitting commands.
#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum VariantFlag {
    Basic,
    Iso,
    Both,
}

impl From<VariantFlag> for VariantChoice {
    fn from(v: VariantFlag) -> Self {
        match v {
            VariantFlag::Basic => VariantChoice::Basic,
            VariantFlag::Iso => VariantChoice::Iso,
            VariantFlag::Both => VariantChoice::Both,
        }
    }
}

/// Detector flags shared by `train` and `cv`.
#[derive(Debug, clap::Args)]
pub struct DetectorFlags {
    /// Detector family.
    #[arg(long, value_enum, default_value_t = DetectorKind::IsolationForest)]
    pub detector: DetectorKind,
    /// Trees in an isolation forest.
    #[arg(long, default_value_t = 1000)]
    pub trees: usize,
    /// Subsample fraction per tree.
    #[arg(long, default_value_t = 0.2)]
    pub subsample: f64,
    /// Projections in a projection-histogram ensemble.
    #[arg(long, default_value_t = 1000)]
    pub projections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DetectorKind {
    IsolationForest,
    Loda,
}

impl DetectorFlags {
    pub fn to_config(&self) -> DetectorConfig {
        match self.detector {
            DetectorKind::IsolationForest => DetectorConfig::IsolationForest {
                n_trees: self.trees,
                subsample_fraction: self.subsample,
            },
            DetectorKind::Loda => DetectorConfig::Loda {
                n_projections: self.projections,
            },
        }
    }
}

/// Human-readable threshold: the number, or the flag-everything sentinel.
pub fn display_tau(tau: Tau<f64>) -> String {
    match tau {
        Tau::FlagAll => "flag_all (every score alarms)".to_string(),
        Tau::Score(t) => format!("{t}"),
    }
}

/// Create the output directory (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}
