//! Simulations on the noisy quadratic.
//!
//! Near the minimum of the quadratic, minibatch SGD settles into a
//! stationary cloud whose spread is set by the noise scale `g`: two
//! settings with equal `g` produce the same spread even when their
//! learning rates differ. This module measures that spread
//! ([`stationary_variance`], [`noise_scale_sweep`]) and checks the
//! accumulation growth model of the momentum optimizer against simulation
//! ([`accumulation_growth_sim`], [`lost_epochs_empirical`]).

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{Optimizer, OptimizerConfig, OptimizerKind};
use crate::problem::{BatchPlan, NoisyQuadratic, Problem};
use crate::schedule::{accumulation_forecast, noise_scale, AccumulationForecast};
use crate::seed;

/// Number of contiguous batches for batch-means standard errors.
pub const BATCH_MEANS: usize = 50;
pub const MIN_SAMPLES: u64 = 100;
/// Burn-in in units of the relaxation time.
pub const BURN_IN_RELAXATIONS: f64 = 50.0;
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub momentum: f64,
    /// Updates discarded before sampling; `None` uses 50 relaxation times.
    pub burn_in: Option<u64>,
    pub n_samples: u64,
    pub seed: u64,
}

/// Mean of `|w - x_bar|^2` over the sampled updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub variance: f64,
    pub standard_error: f64,
    pub samples_used: u64,
    pub burn_in_updates: u64,
}

/// Updates needed for the slowest mode of the linearised dynamics to decay
/// by `e`.
pub fn relaxation_updates(lr: f64, lambda: f64, momentum: f64) -> f64 {
    let fast = lr * lambda / (1.0 - momentum);
    (1.0 / fast).max(1.0 / (1.0 - momentum))
}

fn check_stability(problem: &NoisyQuadratic, lr: f64, momentum: f64) -> Result<()> {
    let bound = 2.0 * (1.0 - momentum);
    if lr * problem.lambda() >= bound {
        return Err(Error::Instability(format!(
            "lr * lambda = {} violates the stability bound lr * lambda < 2 (1 - m) = {bound}",
            lr * problem.lambda()
        )));
    }
    Ok(())
}

fn optimizer_for(momentum: f64, dim: usize) -> Optimizer {
    let kind = if momentum == 0.0 {
        OptimizerKind::Sgd
    } else {
        OptimizerKind::Momentum
    };
    Optimizer::new(&OptimizerConfig::new(kind), dim)
}

/// Mean and batch-means standard error of a correlated series.
fn batch_means(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let per = n / BATCH_MEANS;
    let means: Vec<f64> = (0..BATCH_MEANS)
        .map(|b| samples[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
        .collect();
    let mm = means.iter().sum::<f64>() / BATCH_MEANS as f64;
    let var = means.iter().map(|x| (x - mm) * (x - mm)).sum::<f64>() / (BATCH_MEANS - 1) as f64;
    (mean, (var / BATCH_MEANS as f64).sqrt())
}

/// Run constant-hyperparameter minibatch SGD (heavy-ball when `m > 0`)
/// from the minimum and record `|w - x_bar|^2` after every update past the
/// burn-in.
pub fn stationary_variance(problem: &NoisyQuadratic, cfg: &VarianceConfig) -> Result<VarianceEstimate> {
    noise_scale(cfg.lr, problem.len(), cfg.batch_size, cfg.momentum)?;
    if cfg.n_samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            cfg.n_samples
        )));
    }
    check_stability(problem, cfg.lr, cfg.momentum)?;
    let burn_in = cfg.burn_in.unwrap_or_else(|| {
        (BURN_IN_RELAXATIONS * relaxation_updates(cfg.lr, problem.lambda(), cfg.momentum)).ceil() as u64
    });

    let dim = problem.dim();
    let mut params = problem.minimum().to_vec();
    let mut grad = vec![0.0; dim];
    let mut opt = optimizer_for(cfg.momentum, dim);
    let mut plan = BatchPlan::new(problem.len(), seed::derive(cfg.seed, seed::stream::SAMPLER));
    let threshold = DIVERGENCE_FACTOR * problem.full_loss_closed_form(&params).max(f64::MIN_POSITIVE);

    let total = burn_in + cfg.n_samples;
    let mut samples = Vec::with_capacity(cfg.n_samples as usize);
    let mut step: u64 = 0;
    let mut epoch = 0;
    'outer: loop {
        plan.begin_epoch(epoch, cfg.batch_size)?;
        while let Some(batch) = plan.next_batch() {
            problem.batch_grad(&params, batch, &mut grad);
            opt.step(&mut params, &grad, cfg.lr, cfg.momentum)?;
            step += 1;
            let loss = problem.full_loss_closed_form(&params);
            if !(loss.is_finite() && loss <= threshold) {
                return Err(Error::Instability(format!(
                    "loss {loss} exceeded {DIVERGENCE_FACTOR:e} x its initial value after {step} updates \
                     (stability bound lr * lambda < 2 (1 - m))"
                )));
            }
            if step > burn_in {
                samples.push(problem.distance_sq(&params));
            }
            if step >= total {
                break 'outer;
            }
        }
        epoch += 1;
    }
    let (variance, standard_error) = batch_means(&samples);
    Ok(VarianceEstimate {
        variance,
        standard_error,
        samples_used: samples.len() as u64,
        burn_in_updates: burn_in,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub lr: f64,
    pub batch_size: usize,
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub g: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub variance: f64,
    pub stderr: f64,
}

/// Stationary variances against the exact noise scale, with a
/// least-squares line `variance = intercept + slope * g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepRow>,
    pub fit_slope: f64,
    pub fit_intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares of `y` on `x`: `(slope, intercept, r2, slope_se)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::Fit(format!("need at least two points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("all points share the same noise scale".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_se = if n > 2 {
        (ss_res / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, intercept, r2, slope_se))
}

/// Measure [`stationary_variance`] at every point (in parallel; point `i`
/// uses stream `i` of `seed`) and fit variance against `g`.
pub fn noise_scale_sweep(
    problem: &NoisyQuadratic,
    points: &[SweepPoint],
    burn_in: Option<u64>,
    n_samples: u64,
    seed: u64,
) -> Result<SweepResult> {
    if points.len() < 2 {
        return Err(Error::Fit(format!(
            "a sweep needs at least two points, got {}",
            points.len()
        )));
    }
    let n = problem.len();
    let mut rows = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let est = stationary_variance(
                problem,
                &VarianceConfig {
                    lr: p.lr,
                    batch_size: p.batch_size,
                    momentum: p.momentum,
                    burn_in,
                    n_samples,
                    seed: seed::derive(seed, i as u64),
                },
            )?;
            Ok(SweepRow {
                g: noise_scale(p.lr, n, p.batch_size, p.momentum)?.value(),
                lr: p.lr,
                batch_size: p.batch_size,
                momentum: p.momentum,
                variance: est.variance,
                stderr: est.standard_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.g.total_cmp(&b.g));
    let g: Vec<f64> = rows.iter().map(|r| r.g).collect();
    let v: Vec<f64> = rows.iter().map(|r| r.variance).collect();
    let (fit_slope, fit_intercept, r_squared, slope_stderr) = linear_fit(&g, &v)?;
    Ok(SweepResult {
        points: rows,
        fit_slope,
        fit_intercept,
        r_squared,
        slope_stderr,
    })
}

impl SweepResult {
    /// Delimited text with columns `g, epsilon, batch_size, momentum,
    /// variance, stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["g", "epsilon", "batch_size", "momentum", "variance", "stderr"])?;
        for r in &self.points {
            w.write_record([
                r.g.to_string(),
                r.lr.to_string(),
                r.batch_size.to_string(),
                r.momentum.to_string(),
                r.variance.to_string(),
                r.stderr.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<sweep csv>", e))?;
        Ok(())
    }
}

/// Accumulation values `A_0 = 0, A_1, ..., A_n` under a constant gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationTrace {
    pub gradient: f64,
    pub momentum: f64,
    pub values: Vec<f64>,
}

/// Run the momentum optimizer on a one-parameter problem whose gradient is
/// always `gradient`, recording the accumulation after every update.
pub fn accumulation_growth_sim(gradient: f64, momentum: f64, n_steps: u64) -> Result<AccumulationTrace> {
    if n_steps < 1 {
        return Err(Error::Domain("n_steps must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&momentum) {
        return Err(Error::Domain(format!("momentum {momentum} outside [0, 1)")));
    }
    let mut opt = Optimizer::new(&OptimizerConfig::new(OptimizerKind::Momentum), 1);
    let mut w = [0.0];
    let mut values = Vec::with_capacity(n_steps as usize + 1);
    values.push(0.0);
    for _ in 0..n_steps {
        opt.step(&mut w, &[gradient], 1.0, momentum)?;
        values.push(opt.accumulation().expect("momentum state")[0]);
    }
    Ok(AccumulationTrace {
        gradient,
        momentum,
        values,
    })
}

impl AccumulationTrace {
    fn forecast(&self) -> AccumulationForecast {
        accumulation_forecast(self.gradient, self.momentum, 1, 1).expect("validated momentum")
    }

    /// `max_s |A_s - G (1 - m^s) / (1 - m)|`.
    pub fn max_abs_error_vs_discrete(&self) -> f64 {
        let f = self.forecast();
        self.values
            .iter()
            .enumerate()
            .map(|(s, a)| (a - f.discrete(s as u64)).abs())
            .fold(0.0, f64::max)
    }

    /// `max_{s <= horizon} |A_s - A_continuous(s)| / steady_state`.
    pub fn max_relative_gap_vs_continuous(&self, horizon: u64) -> f64 {
        let f = self.forecast();
        let ss = f.steady_state();
        self.values
            .iter()
            .take(horizon as usize + 1)
            .enumerate()
            .map(|(s, a)| ((a - f.continuous(s as f64)) / ss).abs())
            .fold(0.0, f64::max)
    }
}

/// Result of [`lost_epochs_empirical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LostEpochs {
    pub measured_epochs: f64,
    pub measured_updates: f64,
    /// `B / (N (1 - m))`.
    pub predicted_epochs: f64,
    pub window_updates: u64,
    /// `|grad_end - grad_start| / |grad_start|` of the measured trajectory.
    pub gradient_drift: f64,
}

/// Maximum relative change of the full gradient across the measurement
/// window.
pub const REGIME_TOLERANCE: f64 = 0.1;

/// Measure how far a zero-initialised momentum trajectory falls behind one
/// whose accumulation starts at its steady state `G / (1 - m)`.
///
/// Both trajectories start far from the minimum (so the gradient is nearly
/// constant) and consume the same minibatch sequence for
/// `ceil(20 / (1 - m))` updates. The displacement deficit along the
/// initial gradient, divided by the steady-state step `lr |G| / (1 - m)`,
/// is the number of lost updates; multiplying by `B / N` converts it to
/// epochs.
pub fn lost_epochs_empirical(
    problem: &NoisyQuadratic,
    lr: f64,
    batch_size: usize,
    momentum: f64,
    seed: u64,
) -> Result<LostEpochs> {
    let n = problem.len();
    let predicted = accumulation_forecast(1.0, momentum, n, batch_size)?.lost_epochs();
    noise_scale(lr, n, batch_size, momentum)?;
    let dim = problem.dim();
    let window = (20.0 / (1.0 - momentum)).ceil() as u64;

    let distance = 1e3 * (1.0 + problem.sigma() * (dim as f64).sqrt());
    let unit = 1.0 / (dim as f64).sqrt();
    let start: Vec<f64> = problem.minimum().iter().map(|m| m + distance * unit).collect();
    let g0 = problem.full_grad(&start);
    let g0_norm = g0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let direction: Vec<f64> = g0.iter().map(|x| x / g0_norm).collect();

    let mut lagging = optimizer_for(momentum.max(f64::MIN_POSITIVE), dim);
    let mut steady = lagging.clone();
    for (a, g) in steady.accumulation_mut().expect("momentum state").iter_mut().zip(&g0) {
        *a = g / (1.0 - momentum);
    }
    let mut w_lag = start.clone();
    let mut w_ss = start.clone();
    let mut grad = vec![0.0; dim];
    let sampler_seed = seed::derive(seed, seed::stream::SAMPLER);
    let mut plan = BatchPlan::new(n, sampler_seed);
    let mut step = 0;
    let mut epoch = 0;
    'outer: loop {
        plan.begin_epoch(epoch, batch_size)?;
        while let Some(batch) = plan.next_batch() {
            problem.batch_grad(&w_lag, batch, &mut grad);
            lagging.step(&mut w_lag, &grad, lr, momentum)?;
            problem.batch_grad(&w_ss, batch, &mut grad);
            steady.step(&mut w_ss, &grad, lr, momentum)?;
            step += 1;
            if step >= window {
                break 'outer;
            }
        }
        epoch += 1;
    }

    let g_end = problem.full_grad(&w_lag);
    let drift = g_end
        .iter()
        .zip(&g0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / g0_norm;
    if drift > REGIME_TOLERANCE {
        return Err(Error::Regime(format!(
            "gradient changed by {:.1}% over {window} updates (limit {:.0}%); reduce the learning rate",
            100.0 * drift,
            100.0 * REGIME_TOLERANCE
        )));
    }
    let travelled = |w: &[f64]| -> f64 { start.iter().zip(w).zip(&direction).map(|((s, w), d)| (s - w) * d).sum() };
    let deficit = travelled(&w_ss) - travelled(&w_lag);
    let measured_updates = deficit * (1.0 - momentum) / (lr * g0_norm);
    Ok(LostEpochs {
        measured_epochs: measured_updates * batch_size as f64 / n as f64,
        measured_updates,
        predicted_epochs: predicted,
        window_updates: window,
        gradient_drift: drift,
    })
}
