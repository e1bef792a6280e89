use proptest::prelude::*;

use batchscale::optimizer::sgd_step;
use batchscale::problem::BatchPlan;
use batchscale::schedule::{accumulation_forecast, noise_scale, noise_scale_approx, ConversionMode, Phase, Schedule};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

prop_compose! {
    fn decaying_schedule()(
        n in 1_000usize..100_000,
        b_frac in 0.0001f64..0.005,
        m in prop::sample::select(vec![0.0, 0.5, 0.9, 0.975]),
        lr0 in 0.001f64..2.0,
        steps in prop::collection::vec((1usize..25, 1.2f64..8.0), 1..5),
    ) -> Schedule {
        let b = ((n as f64 * b_frac).round() as usize).max(1);
        let mut lr = lr0;
        let mut start = 0;
        let mut phases = Vec::new();
        for (len, factor) in steps {
            phases.push(Phase::new(start as f64, (start + len) as f64, lr, b, m));
            start += len;
            lr /= factor;
        }
        Schedule::new(n, start as f64, phases).unwrap()
    }
}

fn max_g_change(a: &Schedule, b: &Schedule) -> f64 {
    a.noise_scales_approx()
        .iter()
        .zip(b.noise_scales_approx())
        .map(|(x, y)| rel(*x, y))
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn conversion_preserves_noise_scale(s in decaying_schedule(), cap_frac in 0.0f64..1.0) {
        let free = s.convert_to_batch_increase(None).unwrap();
        prop_assert!(max_g_change(&s, &free) <= 1e-12);
        prop_assert_eq!(free.phases().len(), s.phases().len());
        let b0 = s.phases()[0].batch_size;
        let top = free.max_batch_size().unwrap();
        let cap = b0 + ((top - b0) as f64 * cap_frac) as usize;
        let capped = s.convert_to_batch_increase(Some(cap)).unwrap();
        prop_assert!(capped.max_batch_size().unwrap() <= cap);
        prop_assert!(max_g_change(&s, &capped) <= 1e-12);
    }

    #[test]
    fn converted_batches_and_rates_are_monotone(s in decaying_schedule()) {
        let c = s.convert_to_batch_increase(None).unwrap();
        for w in c.phases().windows(2) {
            prop_assert!(w[1].batch_size >= w[0].batch_size);
        }
        for (a, b) in s.phases().iter().zip(c.phases()) {
            prop_assert_eq!(a.start_epoch, b.start_epoch);
            prop_assert_eq!(a.end_epoch, b.end_epoch);
            prop_assert_eq!(a.momentum, b.momentum);
        }
    }

    #[test]
    fn mode_update_counts_are_ordered(s in decaying_schedule()) {
        let decay = s.apply_conversion(ConversionMode::Decay, None).unwrap();
        let hybrid = s.apply_conversion(ConversionMode::Hybrid, None).unwrap();
        let increase = s.apply_conversion(ConversionMode::Increase, None).unwrap();
        prop_assert_eq!(&decay, &s);
        prop_assert!(decay.update_count_ratio() >= hybrid.update_count_ratio());
        prop_assert!(hybrid.update_count_ratio() >= increase.update_count_ratio());
        prop_assert!(decay.update_count() >= hybrid.update_count());
        prop_assert!(hybrid.update_count() >= increase.update_count());
    }

    #[test]
    fn larger_batches_never_add_updates(
        n in 10usize..10_000, epochs in 1usize..20, b in 1usize..500, extra in 1usize..500,
    ) {
        prop_assume!(b + extra <= n);
        let small = Schedule::constant(n, epochs, 0.1, b, 0.0).unwrap();
        let large = Schedule::constant(n, epochs, 0.1, b + extra, 0.0).unwrap();
        prop_assert!(large.update_count_ratio() <= small.update_count_ratio());
        prop_assert!(large.update_count() <= small.update_count());
        prop_assert!(small.update_count() as f64 >= small.update_count_exact());
        prop_assert_eq!(small.update_count(), epochs as u64 * n.div_ceil(b) as u64);
    }

    #[test]
    fn linear_scaling_keeps_noise_scale_and_composes(s in decaying_schedule(), k1 in 0.5f64..4.0, k2 in 0.5f64..4.0) {
        let b0 = s.phases()[0].batch_size as f64;
        prop_assume!((b0 * k1).round() >= 1.0 && (b0 * k1 * k2).round() >= 1.0);
        prop_assume!(b0 * k1 * k2 * 1.01 < s.dataset_size() as f64 && b0 * k1 < s.dataset_size() as f64);
        let once = s.apply_linear_scaling(k1).unwrap();
        prop_assert!(max_g_change(&s, &once) <= 1e-12);
        let twice = once.apply_linear_scaling(k2).unwrap();
        prop_assert!(max_g_change(&s, &twice) <= 1e-12);
        let direct = s.apply_linear_scaling(k1 * k2).unwrap();
        prop_assert!(max_g_change(&twice, &direct) <= 1e-12);
        prop_assert_eq!(s.apply_linear_scaling(1.0).unwrap(), s.clone());
    }

    #[test]
    fn momentum_scaling_keeps_noise_scale(s in decaying_schedule(), m_new in 0.0f64..0.99) {
        let b0 = s.phases()[0].batch_size as f64;
        let m0 = s.phases()[0].momentum;
        let grown = b0 * (1.0 - m0) / (1.0 - m_new);
        prop_assume!(grown.round() >= 1.0 && grown < s.dataset_size() as f64);
        let scaled = s.apply_momentum_scaling(m_new).unwrap();
        prop_assert!(max_g_change(&s, &scaled) <= 1e-12);
        prop_assert!(scaled.phases().iter().all(|p| p.momentum == m_new));
    }

    #[test]
    fn approximate_noise_scale_bounds_exact(lr in 1e-4f64..10.0, n in 2usize..1_000_000, b_frac in 0.0f64..1.0, m in 0.0f64..0.999) {
        let b = 1 + ((n - 1) as f64 * b_frac) as usize;
        let exact = noise_scale(lr, n, b, m).unwrap().value();
        let approx = noise_scale_approx(lr, n, b, m).unwrap();
        prop_assert!(exact >= 0.0);
        prop_assert!(approx >= exact);
        prop_assert!(rel(approx - exact, lr / (1.0 - m)) <= 1e-9);
    }

    #[test]
    fn sampler_partitions_every_epoch(n in 1usize..500, b in 1usize..600, seed in any::<u64>(), epochs in 1usize..4) {
        prop_assume!(b <= n);
        let mut plan = BatchPlan::new(n, seed);
        for e in 0..epochs {
            plan.begin_epoch(e, b).unwrap();
            let mut seen = vec![false; n];
            let mut sizes = Vec::new();
            while let Some(batch) = plan.next_batch() {
                sizes.push(batch.len());
                for &i in batch {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            prop_assert_eq!(sizes.len(), n.div_ceil(b));
            prop_assert!(sizes[..sizes.len() - 1].iter().all(|&s| s == b));
            prop_assert_eq!(*sizes.last().unwrap(), n - b * (sizes.len() - 1));
        }
    }

    #[test]
    fn sgd_scale_covariance(
        w in prop::collection::vec(-100.0f64..100.0, 1..16),
        lr in 1e-6f64..10.0,
        k in 1e-3f64..1e3,
        seed in any::<u64>(),
    ) {
        let grad: Vec<f64> = w.iter().enumerate().map(|(i, x)| x.sin() * (seed.rotate_left(i as u32) % 97) as f64).collect();
        let mut a = w.clone();
        sgd_step(&mut a, &grad, lr).unwrap();
        let scaled: Vec<f64> = grad.iter().map(|g| g / k).collect();
        let mut b = w.clone();
        sgd_step(&mut b, &scaled, k * lr).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn accumulation_rises_monotonically(m in 0.0f64..0.999, g in 0.01f64..10.0) {
        let f = accumulation_forecast(g, m, 1000, 10).unwrap();
        let mut prev = 0.0;
        for s in 1..200u64 {
            let a = f.discrete(s);
            prop_assert!(a >= prev);
            prop_assert!(a <= f.steady_state() * (1.0 + 1e-12));
            prop_assert!(f.continuous(s as f64) <= f.steady_state());
            prev = a;
        }
    }
}
