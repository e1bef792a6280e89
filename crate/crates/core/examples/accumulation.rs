//! Growth of the momentum accumulation from zero under a constant gradient.

use batchscale::dynamics::accumulation_growth_sim;
use batchscale::schedule::accumulation_forecast;

fn main() -> batchscale::Result<()> {
    for m in [0.9, 0.98, 0.9875] {
        let trace = accumulation_growth_sim(1.0, m, 2_000)?;
        let f = accumulation_forecast(1.0, m, 50_000, 128)?;
        println!(
            "m = {m}: A(100) = {:.4} of {:.1}, closed-form error {:.1e}, continuous gap {:.2}%, lost epochs {:.4}",
            trace.values[100],
            f.steady_state(),
            trace.max_abs_error_vs_discrete(),
            100.0 * trace.max_relative_gap_vs_continuous(2_000),
            f.lost_epochs()
        );
    }
    Ok(())
}
