//! Turn the wide-ResNet step-decay schedule into batch-size increases.
//!
//! ```bash
//! cargo run --example convert_schedule
//! ```

use batchscale::schedule::{ConversionMode, Schedule};

fn show(label: &str, s: &Schedule) {
    println!("{label}");
    for p in s.phases() {
        println!(
            "  epochs {:>3}-{:<3} lr {:<8} B {:<6} g {:.3}",
            p.start_epoch,
            p.end_epoch,
            p.lr,
            p.batch_size,
            p.noise_scale_approx(s.dataset_size()).unwrap()
        );
    }
    println!("  updates: {}", s.update_count_exact());
}

fn main() -> batchscale::Result<()> {
    let original = Schedule::wide_resnet_cifar10();
    show("decaying learning rate", &original);
    show("increasing batch size", &original.apply_conversion(ConversionMode::Increase, None)?);
    show("hybrid", &original.apply_conversion(ConversionMode::Hybrid, None)?);
    show("capped at 5120", &original.apply_conversion(ConversionMode::Increase, Some(5120))?);
    Ok(())
}
