//! Partial sums of lr and lr^2 over a finite step schedule.
//!
//! Holding the final rate forever makes both sums diverge. The harmonic
//! mode uses lr_i = lr / i at every update: sum lr grows like log(i) and
//! sum lr^2 stays below lr^2 pi^2 / 6.

use batchscale::schedule::{LrExtension, Schedule};

fn main() -> batchscale::Result<()> {
    let s = Schedule::step_decay(50_000, 0.1, 128, 0.0, &[60, 120, 160], 200, 5.0)?;
    for ext in [LrExtension::HoldFinal, LrExtension::Harmonic] {
        println!("{ext:?}");
        for horizon in [10_000u64, 100_000, 1_000_000, 10_000_000] {
            let rm = s.robbins_monro_diagnostic(horizon, ext);
            println!("  {horizon:>9} updates: sum lr {:>12.3} sum lr^2 {:>10.5}", rm.sum_lr, rm.sum_lr_sq);
        }
    }
    Ok(())
}
