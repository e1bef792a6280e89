//! Decay, hybrid and increase modes on the tiny MLP: same final loss,
//! far fewer updates.

use batchscale::harness::{compare_schedules, ExperimentConfig, ProblemSpec};
use batchscale::optimizer::{OptimizerConfig, OptimizerKind};
use batchscale::schedule::{ConversionMode, Schedule};

fn main() -> batchscale::Result<()> {
    let n = 4000;
    let cfg = ExperimentConfig::new(
        ProblemSpec::Mlp {
            n,
            dim: 2,
            hidden_units: 16,
        },
        OptimizerConfig::new(OptimizerKind::Momentum),
        Schedule::desk_scale(n, 0.02, 32, 0.9)?,
        vec![1, 2, 3, 4, 5],
    );
    let report = compare_schedules(
        &cfg,
        &[ConversionMode::Decay, ConversionMode::Hybrid, ConversionMode::Increase],
    )?;
    print!("{}", report.render());
    Ok(())
}
