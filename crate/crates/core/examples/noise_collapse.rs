//! Stationary variance on the noisy quadratic depends on g, not on lr or B
//! separately.

use batchscale::dynamics::{noise_scale_sweep, SweepPoint};
use batchscale::problem::make_noisy_quadratic;

fn main() -> batchscale::Result<()> {
    let q = make_noisy_quadratic(1.0, 1.0, 32_768, 2, 0)?;
    let point = |lr, batch_size| SweepPoint {
        lr,
        batch_size,
        momentum: 0.0,
    };
    let points = [point(0.01, 16), point(0.04, 64), point(0.01, 32), point(0.01, 64), point(0.01, 128)];
    let sweep = noise_scale_sweep(&q, &points, None, 100_000, 1)?;
    sweep.write_csv(std::io::stdout().lock())?;
    println!("slope {:.4e}, R^2 {:.4}", sweep.fit_slope, sweep.r_squared);
    Ok(())
}
