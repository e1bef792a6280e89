//! Sweep the initial learning rate with B scaled along, on the quadratic
//! where large rates diverge.

use batchscale::harness::{lr_sweep, ExperimentConfig, ProblemSpec};
use batchscale::optimizer::{OptimizerConfig, OptimizerKind};
use batchscale::schedule::Schedule;

fn main() -> batchscale::Result<()> {
    let n = 4096;
    let cfg = ExperimentConfig::new(
        ProblemSpec::Quadratic {
            lambda: 1.0,
            sigma: 1.0,
            n,
            dim: 4,
        },
        OptimizerConfig::new(OptimizerKind::Sgd),
        Schedule::desk_scale(n, 0.1, 8, 0.0)?,
        vec![1, 2, 3, 4, 5],
    );
    let report = lr_sweep(&cfg, &[0.1, 0.2, 0.4, 0.8, 1.6, 3.2], true)?;
    print!("{}", report.render());
    Ok(())
}
