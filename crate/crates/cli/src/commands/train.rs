//! `opencat train`: fit a detector on clean feature rows.

use std::path::PathBuf;

use anyhow::{bail, Context};

use opencat_core::detectors::iforest::{IsoForest, IsoForestParams};
use opencat_core::detectors::loda::{Loda, LodaParams};
use opencat_core::io::{save_model, Model};
use opencat_core::point::read_points_csv;

use super::{DetectorFlags, DetectorKind};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Feature CSV (columns f0..fD-1, no label column).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
    #[arg(long)]
    seed: u64,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let (points, labels) = read_points_csv::<f64>(&args.data)
        .with_context(|| format!("cannot read {}", args.data.display()))?;
    if labels.is_some() {
        bail!(
            "{} carries a label column; training data must be clean feature rows only",
            args.data.display()
        );
    }

    let model = match args.detector.detector {
        DetectorKind::IsolationForest => {
            let params = IsoForestParams {
                n_trees: args.detector.trees,
                subsample_fraction: args.detector.subsample,
            };
            Model::IsolationForest(IsoForest::train(&points, &params, args.seed)?)
        }
        DetectorKind::Loda => {
            let params = LodaParams {
                n_projections: args.detector.projections,
            };
            Model::Loda(Loda::train(&points, &params, args.seed)?)
        }
    };
    save_model(&args.out, &model)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!(
        "trained {} on {} rows (dim {}), saved to {}",
        model.kind(),
        points.n_rows(),
        points.dim(),
        args.out.display()
    );
    Ok(())
}
