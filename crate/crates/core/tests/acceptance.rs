//! Acceptance criteria. Run with `cargo test --test acceptance`; prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use batchscale::dynamics::{
    accumulation_growth_sim, lost_epochs_empirical, noise_scale_sweep, stationary_variance, SweepPoint,
    VarianceConfig,
};
use batchscale::harness::report::ReportedCount;
use batchscale::harness::run::run_csv_path;
use batchscale::harness::{compare_schedules, reported_counts, rerun, run_experiment, ExperimentConfig, ProblemSpec};
use batchscale::optimizer::{
    momentum_step, nesterov_step, sgd_step, OptimizerConfig, OptimizerKind,
};
use batchscale::problem::{
    gradient_check, make_logistic_synthetic, make_noisy_quadratic, make_tiny_mlp, Problem,
};
use batchscale::schedule::{accumulation_forecast, ConversionMode, Phase, Schedule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// 1 -------------------------------------------------------------------------

fn update_counts() -> Outcome {
    let t = Instant::now();
    let rows = reported_counts();
    let n = 50_000.0;
    // Phase sums over the 60/60/40/40-epoch wide-ResNet schedule.
    let oracle = [
        ("original", 200.0 * n / 128.0),
        (
            "increasing batch size",
            60.0 * n / 128.0 + 60.0 * n / 640.0 + 40.0 * n / 3200.0 + 40.0 * n / 16000.0,
        ),
        ("increased initial learning rate", 60.0 * n / 640.0 + 60.0 * n / 3200.0 + 80.0 * n / 5120.0),
        ("increased momentum coefficient", 60.0 * n / 3200.0 + 140.0 * n / 5120.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, want) in oracle {
        let row: &ReportedCount = rows.iter().find(|r| r.name == name).expect("row present");
        let got = row.exact_f64();
        let ok = got == want && row.passes();
        pass &= ok;
        parts.push(format!("{got} ({}{})", row.bound, if ok { "" } else { " FAILED" }));
    }
    assert_eq!(
        [78125.0, 28875.0, 6406.25, 2304.6875],
        oracle.map(|(_, v)| v),
        "oracle arithmetic"
    );
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < 1.0;
    outcome(pass, format!("{} in {secs:.3}s", parts.join(", ")))
}

// 2 -------------------------------------------------------------------------

fn random_schedule(rng: &mut ChaCha8Rng) -> Schedule {
    let n = rng.random_range(2_000..200_000usize);
    let b0 = rng.random_range(1..=(n / 200).max(1));
    let m = [0.0, 0.5, 0.9, 0.95][rng.random_range(0..4)];
    let n_phases = rng.random_range(1..=5);
    let mut lr = rng.random_range(0.01..1.0);
    let mut start = 0usize;
    let mut phases = Vec::new();
    for _ in 0..n_phases {
        let len = rng.random_range(1..=30);
        phases.push(Phase::new(start as f64, (start + len) as f64, lr, b0, m));
        start += len;
        lr /= rng.random_range(1.5..10.0);
    }
    Schedule::new(n, start as f64, phases).expect("valid random schedule")
}

fn g_preserved(a: &Schedule, b: &Schedule) -> f64 {
    a.noise_scales_approx()
        .iter()
        .zip(b.noise_scales_approx())
        .map(|(x, y)| rel(*x, y))
        .fold(0.0, f64::max)
}

fn conversion_invariant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_171_101);
    let mut worst: f64 = 0.0;
    let mut bound_caps = 0;
    let mut multi_phase = 0;
    for _ in 0..100 {
        let s = random_schedule(&mut rng);
        let free = s.convert_to_batch_increase(None).expect("uncapped conversion");
        worst = worst.max(g_preserved(&s, &free));
        if s.phases().len() > 1 {
            multi_phase += 1;
            // Cap strictly between the initial and the largest converted batch.
            let b0 = s.phases()[0].batch_size;
            let top = free.max_batch_size().unwrap();
            if top > b0 + 1 {
                let cap = rng.random_range(b0..top);
                let capped = s.convert_to_batch_increase(Some(cap)).expect("capped conversion");
                assert!(capped.max_batch_size().unwrap() <= cap);
                worst = worst.max(g_preserved(&s, &capped));
                bound_caps += 1;
            }
        }
    }
    outcome(
        worst <= 1e-12 && bound_caps > 50,
        format!("max relative g change {worst:.2e} over 100 schedules ({multi_phase} multi-phase, {bound_caps} with binding cap)"),
    )
}

// 3 -------------------------------------------------------------------------

/// Composite Simpson rule on [a, b] with `intervals` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn accumulation_exactness() -> Outcome {
    let t = Instant::now();
    let steps = 10_000u64;
    let (mut abs_worst, mut lost_worst, mut gap_worst) = (0.0f64, 0.0f64, 0.0f64);
    for m in [0.0, 0.5, 0.9, 0.98, 0.9875] {
        let g = 1.0;
        let trace = accumulation_growth_sim(g, m, steps).expect("simulation");
        for (s, a) in trace.values.iter().enumerate() {
            let closed = if m == 0.0 {
                if s == 0 { 0.0 } else { g }
            } else {
                g * (1.0 - f64::powi(m, s as i32)) / (1.0 - m)
            };
            abs_worst = abs_worst.max((a - closed).abs());
        }
        for (n, b) in [(50_000usize, 128usize), (50_000, 3200), (8192, 32)] {
            let forecast = accumulation_forecast(g, m, n, b).unwrap();
            let rate = (1.0 - m) * n as f64 / b as f64;
            let quad = simpson(|x| (-rate * x).exp(), 0.0, 60.0 / rate, 200_000);
            lost_worst = lost_worst.max((forecast.lost_epochs() - quad).abs());
        }
        if m >= 0.9 {
            let ss = g / (1.0 - m);
            for (s, a) in trace.values.iter().enumerate() {
                let cont = ss * (1.0 - (-(1.0 - m) * s as f64).exp());
                gap_worst = gap_worst.max((a - cont).abs() / ss);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        abs_worst <= 1e-12 && lost_worst <= 1e-8 && gap_worst <= 0.05 && secs < 1.0,
        format!(
            "max |A - closed form| {abs_worst:.2e}, max |lost - quadrature| {lost_worst:.2e}, \
             max continuous gap {:.2}% (m >= 0.9), {secs:.3}s",
            100.0 * gap_worst
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn noise_collapse() -> Outcome {
    let q = make_noisy_quadratic(1.0, 1.0, 65_536, 2, 4).expect("quadratic");
    let samples = 400_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (lr, b)) in [(0.005, 8usize), (0.01, 16)].into_iter().enumerate() {
        let est = |lr: f64, b: usize, stream: u64| {
            stationary_variance(
                &q,
                &VarianceConfig {
                    lr,
                    batch_size: b,
                    momentum: 0.0,
                    burn_in: None,
                    n_samples: samples,
                    seed: 100 + 2 * i as u64 + stream,
                },
            )
            .expect("stationary variance")
        };
        let small = est(lr, b, 0);
        let large = est(4.0 * lr, 4 * b, 1);
        let diff = (small.variance - large.variance).abs();
        let tol = (0.1 * small.variance).max(
            3.0 * (small.standard_error.powi(2) + large.standard_error.powi(2)).sqrt(),
        );
        pass &= diff <= tol;
        parts.push(format!(
            "({lr}, {b}) vs ({}, {}): {:.4e} vs {:.4e} ({:+.1}%)",
            4.0 * lr,
            4 * b,
            small.variance,
            large.variance,
            100.0 * (large.variance / small.variance - 1.0)
        ));
    }
    let points: Vec<SweepPoint> = [16, 32, 64, 128]
        .into_iter()
        .map(|b| SweepPoint {
            lr: 0.01,
            batch_size: b,
            momentum: 0.0,
        })
        .collect();
    let sweep = noise_scale_sweep(&q, &points, None, samples, 7).expect("sweep");
    pass &= sweep.r_squared >= 0.95;
    parts.push(format!("B sweep R^2 {:.4}", sweep.r_squared));
    outcome(pass, parts.join("; "))
}

// 5 -------------------------------------------------------------------------

const EQUIV_N: usize = 8000;
const EQUIV_B0: usize = 32;
const EQUIV_SEEDS: [u64; 5] = [11, 12, 13, 14, 15];

fn optimizer_variants(sgd_lr: f64) -> Vec<(String, OptimizerConfig, f64, f64)> {
    let mut adam_no_bias = OptimizerConfig::new(OptimizerKind::Adam);
    adam_no_bias.bias_correction = false;
    vec![
        ("sgd".into(), OptimizerConfig::new(OptimizerKind::Sgd), sgd_lr, 0.0),
        ("momentum".into(), OptimizerConfig::new(OptimizerKind::Momentum), 0.1 * sgd_lr, 0.9),
        ("nesterov".into(), OptimizerConfig::new(OptimizerKind::Nesterov), 0.1 * sgd_lr, 0.9),
        ("adam".into(), OptimizerConfig::new(OptimizerKind::Adam), 1e-3, 0.0),
        ("adam (no bias correction)".into(), adam_no_bias, 1e-3, 0.0),
    ]
}

/// One full equivalence sweep. With `data_seed` the dataset is shared by
/// every run and seeds vary only initialisation and batch order.
fn equivalence_sweep(data_seed: Option<u64>, verbose: bool) -> (bool, String) {
    let problems = [
        (
            "logistic",
            ProblemSpec::Logistic {
                n: EQUIV_N,
                dim: 8,
                class_separation: 1.0,
            },
            0.1,
        ),
        (
            "mlp",
            ProblemSpec::Mlp {
                n: EQUIV_N,
                dim: 2,
                hidden_units: 16,
            },
            0.2,
        ),
    ];
    let modes = [ConversionMode::Decay, ConversionMode::Hybrid, ConversionMode::Increase];
    let mut pass = true;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (pname, spec, sgd_lr) in problems {
        for (oname, opt, lr, m) in optimizer_variants(sgd_lr) {
            let mut cfg = ExperimentConfig::new(
                spec.clone(),
                opt,
                Schedule::desk_scale(EQUIV_N, lr, EQUIV_B0, m).expect("desk schedule"),
                EQUIV_SEEDS.to_vec(),
            );
            cfg.data_seed = data_seed;
            let report = compare_schedules(&cfg, &modes).expect("comparison");
            let cmp = report.comparison.as_ref().expect("three modes");
            let failed: usize = report.modes.iter().map(|m| m.failed_runs).sum();
            if failed > 0 || !cmp.update_ratios_match {
                pass = false;
                failures.push(format!("{pname}/{oname}: {failed} failed runs"));
            }
            for p in &cmp.pairs {
                checked += 1;
                let z = p.mean_diff.abs() / p.pooled_sd;
                worst = worst.max(z);
                if !p.within {
                    pass = false;
                    failures.push(format!("{pname}/{oname} {} vs {} {}: {z:.2} pooled sd", p.a, p.b, p.metric));
                }
            }
            if verbose {
                println!("    {pname}/{oname}:");
                for line in report.render().lines() {
                    println!("      {line}");
                }
            }
        }
    }
    let mut detail = format!("{checked} pairwise checks, worst separation {worst:.2} pooled sd (limit 2)");
    if !failures.is_empty() {
        detail.push_str(&format!("; failing: {}", failures.join(", ")));
    }
    (pass, detail)
}

fn schedule_equivalence() -> Outcome {
    let (pass, detail) = equivalence_sweep(None, true);
    // Stricter, informational: a shared dataset removes data variation from
    // the spread.
    let (shared_pass, shared) = equivalence_sweep(Some(2017), false);
    outcome(
        pass,
        format!(
            "{detail} [shared-dataset diagnostic, not part of the verdict: {}; {shared}]",
            if shared_pass { "within" } else { "outside" }
        ),
    )
}

// 6 -------------------------------------------------------------------------

fn optimizer_correctness() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut reduction: f64 = 0.0;
    let mut covariance: f64 = 0.0;
    for _ in 0..200 {
        let dim = rng.random_range(1..20);
        let w0: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let grad: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let lr = rng.random_range(1e-4..1.0);
        let mut plain = w0.clone();
        sgd_step(&mut plain, &grad, lr).unwrap();
        for step in [momentum_step, nesterov_step] {
            let mut w = w0.clone();
            let mut acc = vec![0.0; dim];
            for _ in 0..3 {
                // Repeated steps: accumulated state must stay inert at m = 0.
                let mut reference = w.clone();
                sgd_step(&mut reference, &grad, lr).unwrap();
                step(&mut acc, &mut w, &grad, lr, 0.0).unwrap();
                for (a, b) in w.iter().zip(&reference) {
                    reduction = reduction.max((a - b).abs());
                }
            }
        }
        let k = rng.random_range(0.01..100.0);
        let scaled_grad: Vec<f64> = grad.iter().map(|g| g / k).collect();
        let mut scaled = w0.clone();
        sgd_step(&mut scaled, &scaled_grad, k * lr).unwrap();
        for (a, b) in scaled.iter().zip(&plain) {
            covariance = covariance.max((a - b).abs() / b.abs().max(1.0));
        }
    }

    let problems: Vec<Box<dyn Problem>> = vec![
        Box::new(make_noisy_quadratic(1.3, 0.8, 64, 5, 1).unwrap()),
        Box::new(make_logistic_synthetic(64, 5, 1.5, 2).unwrap()),
        Box::new(make_tiny_mlp(64, 3, 8, 3).unwrap()),
    ];
    let mut grad_worst: f64 = 0.0;
    for p in &problems {
        let mut prng = ChaCha8Rng::seed_from_u64(9);
        let base = p.init_params(4);
        for trial in 0..3 {
            let params: Vec<f64> = base.iter().map(|w| w + 0.5 * prng.random_range(-1.0..1.0)).collect();
            for idx in [0, 17 + trial, 63] {
                grad_worst = grad_worst.max(gradient_check(p.as_ref(), &params, idx, 1e-6).unwrap());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        reduction <= 1e-15 && grad_worst <= 1e-5 && covariance <= 1e-12 && secs < 10.0,
        format!(
            "m = 0 reduction {reduction:.1e}, worst gradient check {grad_worst:.2e}, \
             scale covariance {covariance:.1e}, {secs:.2}s"
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn lost_epochs() -> Outcome {
    let n = 50_000;
    let q = make_noisy_quadratic(1.0, 1.0, n, 2, 21).expect("quadratic");
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, b) in [(0.9, 130usize), (0.98, 3200)] {
        let r = lost_epochs_empirical(&q, 1e-7, b, m, 33).expect("constant-gradient regime");
        let err = (r.measured_epochs - r.predicted_epochs).abs() / r.predicted_epochs;
        pass &= err <= 0.15;
        parts.push(format!(
            "m = {m}, B/N = {}: measured {:.5} vs predicted {:.5} epochs ({:.1}% off)",
            b as f64 / n as f64,
            r.measured_epochs,
            r.predicted_epochs,
            100.0 * err
        ));
    }
    outcome(pass, parts.join("; "))
}

// 9 -------------------------------------------------------------------------

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = ExperimentConfig::new(
        ProblemSpec::Mlp {
            n: 1024,
            dim: 2,
            hidden_units: 8,
        },
        OptimizerConfig::new(OptimizerKind::Nesterov),
        Schedule::desk_scale(1024, 0.02, 8, 0.9).unwrap(),
        vec![3, 1, 2],
    )
    .with_conversion(ConversionMode::Hybrid, None);
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    run_experiment(&cfg, &first).expect("first run");
    rerun(&first, &second).expect("rerun");
    let mut files: Vec<_> = cfg.seeds.iter().map(|&s| (run_csv_path(&first, s), run_csv_path(&second, s))).collect();
    files.push((first.join("curves_by_epochs.csv"), second.join("curves_by_epochs.csv")));
    files.push((first.join("config.json"), second.join("config.json")));
    let identical = files
        .iter()
        .all(|(a, b)| std::fs::read(a).expect("read") == std::fs::read(b).expect("read"));
    outcome(identical, format!("{} files compared byte for byte", files.len()))
}

type Check = (u32, &'static str, fn() -> Outcome);

fn main() {
    let checks: Vec<Check> = vec![
        (1, "update-count reproduction", update_counts),
        (2, "schedule-conversion invariant", conversion_invariant),
        (3, "accumulation exactness", accumulation_exactness),
        (4, "noise-scale collapse", noise_collapse),
        (5, "schedule equivalence at desk scale", schedule_equivalence),
        (6, "optimizer correctness", optimizer_correctness),
        (7, "lost-epochs empirical check", lost_epochs),
        (9, "reproducibility", reproducibility),
    ];
    let mut results = Vec::new();
    for (id, name, f) in checks {
        let t = Instant::now();
        let o = f();
        let line = format!(
            "criterion {id} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        println!("{line}");
        results.push((id, o.pass, line));
    }
    let substitutes = results.iter().filter(|(id, ..)| [4, 5, 7].contains(id)).all(|(_, p, _)| *p);
    let line8 = format!(
        "criterion 8 [{}] not reproducible at desk scale: ImageNet accuracies and training times and \
         absolute CIFAR-10 accuracies are out of scope; substitutes 4, 5 and 7 {}",
        if substitutes { "PASS" } else { "FAIL" },
        if substitutes { "hold" } else { "do not all hold" }
    );
    println!("{line8}");
    results.push((8, substitutes, line8));
    results.sort_by_key(|(id, ..)| *id);

    println!();
    println!("summary:");
    for (_, _, line) in &results {
        println!("  {line}");
    }
    let failed = results.iter().filter(|(_, p, _)| !p).count();
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
