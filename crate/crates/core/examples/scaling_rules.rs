//! Linear scaling (B and lr together) and momentum scaling
//! (B ∝ 1/(1-m)), plus the check that rejects a batch size that changes g.

use batchscale::schedule::Schedule;
use batchscale::Error;

fn main() -> batchscale::Result<()> {
    let base = Schedule::wide_resnet_cifar10();
    for k in [1.0, 5.0, 25.0] {
        let s = base.apply_linear_scaling(k)?;
        let p = &s.phases()[0];
        println!("k = {k:>4}: lr {:<5} B {:<5} g {:.3}", p.lr, p.batch_size, s.noise_scales_approx()[0]);
    }
    let m = base.apply_momentum_scaling(0.98)?;
    println!(
        "m = 0.98: B {} effective lr {}",
        m.phases()[0].batch_size,
        m.phases()[0].effective_lr()
    );

    // ImageNet-like: B = 8192 at m = 0.9 becomes 32768 at m = 0.975.
    let imagenet = Schedule::step_decay(1_281_167, 3.2, 8192, 0.9, &[30, 60, 80], 90, 10.0)?;
    match imagenet.verify_momentum_rescale(0.975, 16384) {
        Err(Error::NotNoisePreserving {
            preserving, g_ratio, ..
        }) => println!("B = 16384 at m = 0.975 is not noise-preserving: use {preserving} (g would grow {g_ratio}x)"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
