use std::path::Path;
use std::process::Command;

use batchscale::harness::emit::read_curve_csv;
use batchscale::harness::run::{run_csv_path, ExperimentSummary};
use batchscale::harness::{run, run_experiment, ExperimentConfig, ProblemSpec};
use batchscale::optimizer::{OptimizerConfig, OptimizerKind};
use batchscale::schedule::{ConversionMode, Schedule};

fn config() -> ExperimentConfig {
    ExperimentConfig::new(
        ProblemSpec::Logistic {
            n: 512,
            dim: 4,
            class_separation: 1.5,
        },
        OptimizerConfig::new(OptimizerKind::Momentum),
        Schedule::desk_scale(512, 0.02, 8, 0.9).unwrap(),
        vec![7, 8],
    )
    .with_conversion(ConversionMode::Increase, None)
}

#[test]
fn identical_configs_give_identical_records() {
    let a = run(&config()).unwrap();
    let b = run(&config()).unwrap();
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        assert!(x.same_outcome(y));
    }
    assert_ne!(a[0].rows, a[1].rows, "distinct seeds differ");
}

#[test]
fn experiment_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let records = run_experiment(&cfg, dir.path()).unwrap();

    let snapshot = ExperimentConfig::read(&dir.path().join("config.json")).unwrap();
    assert_eq!(snapshot, cfg);

    let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let summary: ExperimentSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(summary.total_updates_predicted, cfg.resolved_schedule().unwrap().update_count());
    assert_eq!(summary.runs.len(), 2);
    assert!(!dir.path().join("summary.json.tmp").exists());

    for rec in &records {
        let rows = read_curve_csv(&run_csv_path(dir.path(), rec.seed)).unwrap();
        assert_eq!(rows, rec.rows);
        assert_eq!(rows.last().unwrap().updates, summary.total_updates_predicted);
    }
    assert!(dir.path().join("curves_by_epochs.csv").exists());
}

fn cli(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_batchscale"))
        .args(args)
        .env("BATCHSCALE_OUT", out)
        .output()
        .expect("binary runs")
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let counts = cli(&["paper-counts"], dir.path());
    assert!(counts.status.success());
    let stdout = String::from_utf8(counts.stdout).unwrap();
    assert!(stdout.contains("78125") && stdout.contains("2304.6875"));

    // A diverging run is data: exit 0 and a failed flag in the summary.
    let diverging = ExperimentConfig::new(
        ProblemSpec::Quadratic {
            lambda: 1.0,
            sigma: 0.5,
            n: 64,
            dim: 2,
        },
        OptimizerConfig::new(OptimizerKind::Sgd),
        Schedule::constant(64, 3, 4.0, 8, 0.0).unwrap(),
        vec![1],
    );
    let cfg_path = dir.path().join("diverging.json");
    std::fs::write(&cfg_path, diverging.to_json_pretty()).unwrap();
    let out = dir.path().join("exp");
    let ran = cli(&["run", "--config", cfg_path.to_str().unwrap(), "--seed", "5"], &out);
    assert!(ran.status.success(), "{}", String::from_utf8_lossy(&ran.stderr));
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"failed\": true"));
    assert!(out.join("runs/5.csv").exists(), "--seed overrides the config");

    // Config errors are reported with a nonzero exit before any training.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"problem": {"kind": "quadratic"}}"#).unwrap();
    let failed = cli(&["run", "--config", bad.to_str().unwrap()], &dir.path().join("never"));
    assert!(!failed.status.success());
    assert!(!dir.path().join("never").exists());

    let schedule = dir.path().join("schedule.json");
    Schedule::wide_resnet_cifar10().write(&schedule).unwrap();
    let converted = cli(
        &["convert", schedule.to_str().unwrap(), "--mode", "hybrid", "--b-max", "640"],
        dir.path(),
    );
    assert!(converted.status.success());
    let s = Schedule::from_json(&String::from_utf8(converted.stdout).unwrap()).unwrap();
    assert_eq!(s.max_batch_size(), Some(640));
    let counted = cli(&["count", schedule.to_str().unwrap()], dir.path());
    assert!(String::from_utf8(counted.stdout).unwrap().contains("integer: 78200"));
}
