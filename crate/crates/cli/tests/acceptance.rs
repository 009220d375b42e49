//! Reproducibility gate for the command-line interface: identical
//! invocations with identical seeds must produce byte-identical reports.

use std::path::Path;
use std::process::Command;

fn opencat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opencat"))
}

fn verdict(id: u32, name: &str, pass: bool, details: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {id} ({name}): {status} — {details}");
    assert!(pass, "criterion {id} ({name}) failed: {details}");
}

fn run_experiment(config: &Path, out: &Path) {
    let output = opencat()
        .args(["experiment", "--config"])
        .arg(config)
        .args(["--seed", "20250814"])
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn opencat");
    assert!(
        output.status.success(),
        "experiment run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn criterion_9_identical_invocations_write_identical_reports() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "n = 600\nalpha = 0.25\nq = 0.05\nrepetitions = 5\neval_size = 1500\n\
         variants = \"both\"\n\n[detector]\nkind = \"isolation_forest\"\n\
         n_trees = 50\nsubsample_fraction = 0.2\n",
    )
    .expect("write config");

    let first = dir.path().join("first");
    let second = dir.path().join("second");
    run_experiment(&config, &first);
    run_experiment(&config, &second);

    let mut mismatches = Vec::new();
    for file in ["trials.csv", "summary.csv"] {
        let a = std::fs::read(first.join(file)).expect("read first run");
        let b = std::fs::read(second.join(file)).expect("read second run");
        assert!(!a.is_empty(), "{file} is empty");
        if a != b {
            mismatches.push(file);
        }
    }
    verdict(
        9,
        "deterministic reproducibility",
        mismatches.is_empty(),
        &format!(
            "two runs with the same config and seed: trials.csv and summary.csv {}",
            if mismatches.is_empty() {
                "are byte-identical".to_string()
            } else {
                format!("differ in {mismatches:?}")
            }
        ),
    );
}
