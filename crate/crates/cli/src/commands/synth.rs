//! `opencat synth`: benchmark data generation.

use std::path::PathBuf;

use anyhow::Context;

use opencat_core::point::write_points_csv;
use opencat_core::synth::{gen_alien, gen_mixture, gen_nominal, MixtureMode, SynthConfig};

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Kind {
    /// Pure nominal rows.
    Nominal,
    /// Pure alien rows.
    Alien,
    /// Contaminated rows with a ground-truth label column.
    Mixture,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModeFlag {
    ExactCount,
    Iid,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Number of rows.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Alien fraction (mixture only).
    #[arg(long, required_if_eq("kind", "mixture"))]
    alpha: Option<f64>,
    /// How the alien count is realized (mixture only).
    #[arg(long, value_enum, default_value_t = ModeFlag::ExactCount)]
    mode: ModeFlag,
    /// Data dimension.
    #[arg(long, default_value_t = 9)]
    dim: usize,
    /// Mean shift applied to alien dimensions.
    #[arg(long, default_value_t = 3.0)]
    shift: f64,
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let cfg = SynthConfig {
        dim: args.dim,
        shift: args.shift,
        ..SynthConfig::default()
    };
    let (points, labels) = match args.kind {
        Kind::Nominal => (gen_nominal::<f64>(args.n, &cfg, args.seed)?, None),
        Kind::Alien => (gen_alien::<f64>(args.n, &cfg, args.seed)?.points, None),
        Kind::Mixture => {
            let alpha = args.alpha.expect("clap enforces --alpha for mixtures");
            let mode = match args.mode {
                ModeFlag::ExactCount => MixtureMode::ExactCount,
                ModeFlag::Iid => MixtureMode::Iid,
            };
            let pool = gen_mixture::<f64>(args.n, alpha, mode, &cfg, args.seed)?;
            let labels = pool.labels().to_vec();
            (pool.points().clone(), Some(labels))
        }
    };
    write_points_csv(&args.out, &points, labels.as_deref())
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!(
        "wrote {} rows (dim {}) to {}{}",
        points.n_rows(),
        points.dim(),
        args.out.display(),
        labels
            .as_ref()
            .map(|l| format!(
                ", {} aliens labeled",
                l.iter().filter(|l| l.is_alien()).count()
            ))
            .unwrap_or_default()
    );
    Ok(())
}
