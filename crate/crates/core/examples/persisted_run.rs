//! Run an experiment into a directory, then rerun it from its config.json
//! and compare the curve files.

use batchscale::harness::run::run_csv_path;
use batchscale::harness::{rerun, run_experiment, ExperimentConfig, ProblemSpec};
use batchscale::optimizer::{OptimizerConfig, OptimizerKind};
use batchscale::schedule::{ConversionMode, Schedule};

fn main() -> batchscale::Result<()> {
    let root = std::env::temp_dir().join("batchscale-persisted-run");
    let cfg = ExperimentConfig::new(
        ProblemSpec::Logistic {
            n: 2000,
            dim: 4,
            class_separation: 1.5,
        },
        OptimizerConfig::new(OptimizerKind::Nesterov),
        Schedule::desk_scale(2000, 0.01, 16, 0.9)?,
        vec![1, 2],
    )
    .with_conversion(ConversionMode::Hybrid, None);

    let first = root.join("first");
    let records = run_experiment(&cfg, &first)?;
    rerun(&first, &root.join("second"))?;
    for r in &records {
        let a = std::fs::read(run_csv_path(&first, r.seed)).expect("curve file");
        let b = std::fs::read(run_csv_path(&root.join("second"), r.seed)).expect("curve file");
        println!(
            "seed {}: {} updates, final accuracy {:.3}, rerun identical: {}",
            r.seed,
            r.summary.total_updates,
            r.summary.final_eval_metric,
            a == b
        );
    }
    println!("artifacts in {}", root.display());
    Ok(())
}
