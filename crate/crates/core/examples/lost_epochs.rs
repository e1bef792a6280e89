//! Measure how many epochs a zero-initialised momentum run loses against
//! one started at the steady-state accumulation.

use batchscale::dynamics::lost_epochs_empirical;
use batchscale::problem::make_noisy_quadratic;

fn main() -> batchscale::Result<()> {
    let q = make_noisy_quadratic(1.0, 1.0, 50_000, 2, 0)?;
    for (m, b) in [(0.9, 130), (0.95, 1000), (0.98, 3200)] {
        let r = lost_epochs_empirical(&q, 1e-7, b, m, 1)?;
        println!(
            "m = {m:<5} B = {b:<5} measured {:.4} epochs, B/(N(1-m)) = {:.4}, over {} updates",
            r.measured_epochs, r.predicted_epochs, r.window_updates
        );
    }
    Ok(())
}
