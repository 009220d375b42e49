//! End-to-end behavior of the `opencat` binary: worked fixtures, the
//! exit-code contract, and a full synth → train → score → threshold →
//! classify pipeline.

use std::path::Path;
use std::process::{Command, Output};

use opencat_core::cdf::Tau;

fn opencat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opencat"))
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn assert_success(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn bounds_prints_the_reference_sample_size() {
    let output = opencat()
        .args(["bounds", "--alpha", "0.5", "--epsilon", "0.05", "--delta", "0.05"])
        .output()
        .expect("spawn");
    assert_success(&output, "bounds");
    let text = stdout(&output);
    assert!(
        text.contains("required sample size: 7865"),
        "unexpected output: {text}"
    );
}

#[test]
fn threshold_reproduces_the_worked_fixture() {
    let dir = tempfile::tempdir().expect("tempdir");
    let clean = dir.path().join("clean.scores");
    let mixture = dir.path().join("mixture.scores");
    let out = dir.path().join("threshold.json");
    std::fs::write(&clean, "1\n2\n3\n4\n").unwrap();
    std::fs::write(&mixture, "2\n3\n5\n6\n").unwrap();

    let output = opencat()
        .args(["threshold", "--alpha", "0.5", "--q", "0.25", "--clean"])
        .arg(&clean)
        .arg("--mixture")
        .arg(&mixture)
        .arg("--out")
        .arg(&out)
        .output()
        .expect("spawn");
    assert_success(&output, "threshold");
    assert!(stdout(&output).contains("tau: 4"), "stdout: {}", stdout(&output));

    let record = opencat_core::io::load_threshold(&out).expect("load saved threshold");
    assert_eq!(record.threshold.tau(), Tau::Score(4.0));
    assert_eq!(record.alpha, 0.5);
    assert!(record.provenance.is_some(), "provenance hashes missing");
}

#[test]
fn empty_score_input_exits_3_without_partial_output() {
    let dir = tempfile::tempdir().expect("tempdir");
    let empty = dir.path().join("empty.csv");
    let out = dir.path().join("never.csv");
    std::fs::write(&empty, "").unwrap();

    let output = opencat()
        .args(["score", "--input"])
        .arg(&empty)
        .arg("--out")
        .arg(&out)
        .output()
        .expect("spawn");
    assert_eq!(output.status.code(), Some(3), "empty input must exit 3");
    assert!(!out.exists(), "no output file may be created on failure");
}

#[test]
fn unknown_flags_exit_2() {
    let output = opencat()
        .args(["bounds", "--alpha", "0.5", "--epsilon", "0.05", "--frobnicate"])
        .output()
        .expect("spawn");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn out_of_range_epsilon_exits_4() {
    let output = opencat()
        .args(["bounds", "--alpha", "0.5", "--epsilon", "0.99", "--delta", "0.05"])
        .output()
        .expect("spawn");
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn experiment_without_any_seed_exits_4() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, "n = 100\nrepetitions = 2\n").unwrap();
    let output = opencat()
        .args(["experiment", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .expect("spawn");
    assert_eq!(output.status.code(), Some(4), "missing seed is a domain error");
}

fn line_count(path: &Path) -> usize {
    String::from_utf8(std::fs::read(path).expect("read csv"))
        .expect("utf8")
        .lines()
        .count()
}

#[test]
fn pipeline_from_synthetic_data_to_alarms() {
    let dir = tempfile::tempdir().expect("tempdir");
    let p = |name: &str| dir.path().join(name);

    let synth_clean = opencat()
        .args(["synth", "--n", "400", "--kind", "nominal", "--seed", "1", "--out"])
        .arg(p("train.csv"))
        .output()
        .expect("spawn");
    assert_success(&synth_clean, "synth nominal");

    let synth_mix = opencat()
        .args(["synth", "--n", "300", "--kind", "mixture", "--alpha", "0.2"])
        .args(["--seed", "2", "--out"])
        .arg(p("mix.csv"))
        .output()
        .expect("spawn");
    assert_success(&synth_mix, "synth mixture");

    let train = opencat()
        .args(["train", "--data"])
        .arg(p("train.csv"))
        .args(["--trees", "40", "--seed", "3", "--out"])
        .arg(p("model.json"))
        .output()
        .expect("spawn");
    assert_success(&train, "train");

    let clean_scores = opencat()
        .args(["score", "--model"])
        .arg(p("model.json"))
        .arg("--data")
        .arg(p("train.csv"))
        .arg("--held-out")
        .arg("--out")
        .arg(p("clean.scores"))
        .output()
        .expect("spawn");
    assert_success(&clean_scores, "score held-out");
    assert_eq!(line_count(&p("clean.scores")), 401, "header plus one row per point");

    let mix_scores = opencat()
        .args(["score", "--model"])
        .arg(p("model.json"))
        .arg("--data")
        .arg(p("mix.csv"))
        .arg("--out")
        .arg(p("mix.scores"))
        .output()
        .expect("spawn");
    assert_success(&mix_scores, "score mixture");

    let threshold = opencat()
        .args(["threshold", "--alpha", "0.2", "--q", "0.05", "--variant", "iso"])
        .arg("--clean")
        .arg(p("clean.scores"))
        .arg("--mixture")
        .arg(p("mix.scores"))
        .arg("--out")
        .arg(p("thr.json"))
        .output()
        .expect("spawn");
    assert_success(&threshold, "threshold");

    let alarms = opencat()
        .args(["score", "--scores"])
        .arg(p("mix.scores"))
        .arg("--threshold")
        .arg(p("thr.json"))
        .arg("--out")
        .arg(p("alarms.csv"))
        .output()
        .expect("spawn");
    assert_success(&alarms, "score with threshold");

    let body = std::fs::read_to_string(p("alarms.csv")).expect("read alarms");
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("score,alarm"));
    assert_eq!(lines.clone().count(), 300, "one alarm row per mixture point");
    assert!(
        lines.all(|l| l.ends_with(",true") || l.ends_with(",false")),
        "every row carries an alarm flag"
    );
}

#[test]
fn cv_writes_fold_and_summary_reports() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mix = dir.path().join("mix.csv");
    let out = dir.path().join("cv");

    let synth = opencat()
        .args(["synth", "--n", "300", "--kind", "mixture", "--alpha", "0.3"])
        .args(["--seed", "7", "--out"])
        .arg(&mix)
        .output()
        .expect("spawn");
    assert_success(&synth, "synth mixture");

    let cv = opencat()
        .args(["cv", "--data"])
        .arg(&mix)
        .args(["--folds", "4", "--trees", "40", "--seed", "8", "--out"])
        .arg(&out)
        .output()
        .expect("spawn");
    assert_success(&cv, "cv");

    let folds = std::fs::read_to_string(out.join("cv_folds.csv")).expect("folds csv");
    assert!(folds.starts_with("fold,size,n_alien,variant,tau,recall,fpr"));
    assert_eq!(folds.lines().count(), 1 + 4 * 2, "4 folds x 2 variants");
    let summary = std::fs::read_to_string(out.join("cv_summary.csv")).expect("summary csv");
    assert!(summary.starts_with("variant,realized_alpha,fitting_alpha"));
    assert!(out.join("config.toml").exists(), "resolved config echo missing");
}

#[test]
fn sweep_reports_paired_deltas_with_a_zero_baseline() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "n = 300\nalpha = 0.2\nrepetitions = 2\neval_size = 600\nvariants = \"basic\"\n\n\
         [detector]\nkind = \"isolation_forest\"\nn_trees = 40\n",
    )
    .unwrap();
    let out = dir.path().join("sweep");

    let sweep = opencat()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--seed", "9", "--xis", "0.01,0.02", "--out"])
        .arg(&out)
        .output()
        .expect("spawn");
    assert_success(&sweep, "sweep");

    let rows = std::fs::read_to_string(out.join("sweep_rows.csv")).expect("rows csv");
    assert!(rows.starts_with("xi,trial_seed,variant,admissible,tau,recall,fpr"));
    let baseline_rows: Vec<&str> = rows.lines().filter(|l| l.starts_with("0,")).collect();
    assert_eq!(baseline_rows.len(), 2, "xi = 0 baseline row per trial");
    assert!(
        baseline_rows.iter().all(|l| l.ends_with(",0,0")),
        "baseline deltas must be exactly zero: {baseline_rows:?}"
    );
    let summary = std::fs::read_to_string(out.join("sweep_summary.csv")).expect("summary csv");
    assert_eq!(summary.lines().count(), 1 + 3, "baseline plus two offsets");
}
