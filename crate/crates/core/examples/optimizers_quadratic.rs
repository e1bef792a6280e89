//! The four optimizers on a one-dimensional bowl C(w) = w^2 / 2.

use batchscale::optimizer::{Optimizer, OptimizerConfig, OptimizerKind};

fn main() -> batchscale::Result<()> {
    for kind in OptimizerKind::ALL {
        let mut opt = Optimizer::new(&OptimizerConfig::new(kind), 1);
        let (lr, m) = match kind {
            OptimizerKind::Adam => (0.05, 0.0),
            OptimizerKind::Sgd => (0.05, 0.0),
            _ => (0.05, 0.9),
        };
        let mut w = vec![1.0];
        let mut trace = Vec::new();
        for step in 1..=200 {
            let g = [w[0]];
            opt.step(&mut w, &g, lr, m)?;
            if step % 40 == 0 {
                trace.push(format!("{:+.2e}", w[0]));
            }
        }
        println!("{kind:<9} {}", trace.join(" "));
    }
    Ok(())
}
