//! `opencat score`: score feature rows with a saved model, or pass existing
//! scores through a saved threshold, emitting a CSV of scores and alarms.

use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};

use opencat_core::io::{load_model, load_threshold};
use opencat_core::point::read_points_csv;
use opencat_core::sample::read_scores;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Existing score file (one score per line, or CSV with a score column).
    #[arg(long, alias = "input", conflicts_with_all = ["model", "data"])]
    scores: Option<PathBuf>,
    /// Saved model JSON; requires --data.
    #[arg(long, requires = "data")]
    model: Option<PathBuf>,
    /// Feature CSV to score with --model; a `label` column is ignored.
    #[arg(long, requires = "model")]
    data: Option<PathBuf>,
    /// Score each row with the model as if it were held out from training.
    #[arg(long, requires = "model")]
    held_out: bool,
    /// Saved threshold JSON; adds an `alarm` column.
    #[arg(long, alias = "threshold-file")]
    threshold: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let scores: Vec<f64> = if let Some(path) = &args.scores {
        read_scores(path).with_context(|| format!("cannot read {}", path.display()))?
    } else if let (Some(model_path), Some(data_path)) = (&args.model, &args.data) {
        let model = load_model(model_path)
            .with_context(|| format!("cannot load model {}", model_path.display()))?;
        let (points, labels) = read_points_csv(data_path)
            .with_context(|| format!("cannot read {}", data_path.display()))?;
        if labels.is_some() {
            eprintln!("note: ignoring the label column of {}", data_path.display());
        }
        let scorer = model.as_scorer();
        if args.held_out {
            scorer.held_out_rows(&points)?
        } else {
            scorer.score_rows(&points)?
        }
    } else {
        bail!("provide either --scores FILE or --model FILE --data FILE");
    };
    if scores.is_empty() {
        return Err(opencat_core::Error::EmptySample("no scores in the input").into());
    }

    let threshold = match &args.threshold {
        Some(path) => Some(
            load_threshold(path)
                .with_context(|| format!("cannot load threshold {}", path.display()))?,
        ),
        None => None,
    };

    let mut body = String::new();
    match &threshold {
        Some(record) => {
            body.push_str("score,alarm\n");
            for &s in &scores {
                let alarm = record.threshold.alarm(s);
                body.push_str(&format!("{s},{alarm}\n"));
            }
        }
        None => {
            body.push_str("score\n");
            for &s in &scores {
                body.push_str(&format!("{s}\n"));
            }
        }
    }

    match &args.out {
        Some(path) => {
            std::fs::write(path, &body)
                .with_context(|| format!("cannot write {}", path.display()))?;
            let flagged = threshold.as_ref().map(|record| {
                scores.iter().filter(|&&s| record.threshold.alarm(s)).count()
            });
            match flagged {
                Some(k) => println!(
                    "wrote {} scores to {} ({} alarms)",
                    scores.len(),
                    path.display(),
                    k
                ),
                None => println!("wrote {} scores to {}", scores.len(), path.display()),
            }
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}
