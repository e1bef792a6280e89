//! Piecewise-constant hyperparameter schedules and noise-scale calculus.
//!
//! A [`Schedule`] is a contiguous list of epoch-aligned [`Phase`]s, each
//! holding a learning rate, batch size and momentum coefficient. The noise
//! scale of a phase is
//!
//! ```text
//! g = lr / (1 - m) * (N / B - 1)          (exact, `noise_scale`)
//! g ~ lr * N / (B * (1 - m))              (large-N form, `noise_scale_approx`)
//! ```
//!
//! Schedule transformations ([`Schedule::convert_to_batch_increase`],
//! [`Schedule::apply_linear_scaling`], [`Schedule::apply_momentum_scaling`])
//! preserve the large-N form exactly: per phase they keep
//! `lr / (B * (1 - m))` fixed, choosing an integer batch size first and then
//! letting the learning rate absorb the rounding remainder.

use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPOCH_ALIGN_TOL: f64 = 1e-9;

fn check_momentum(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("momentum {m} outside [0, 1)")));
    }
    Ok(())
}

fn check_lr(lr: f64) -> Result<()> {
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::Domain(format!("learning rate {lr} must be finite and > 0")));
    }
    Ok(())
}

fn check_batch(n: usize, b: usize) -> Result<()> {
    if b < 1 || b > n {
        return Err(Error::Domain(format!("batch size {b} outside [1, {n}]")));
    }
    Ok(())
}

/// Noise scale `g` of one set of hyperparameters. Always `>= 0`, and zero
/// exactly when the batch is the whole dataset.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseScale(f64);

impl NoiseScale {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for NoiseScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Exact noise scale `lr / (1 - m) * (N / B - 1)`.
pub fn noise_scale(lr: f64, n: usize, b: usize, m: f64) -> Result<NoiseScale> {
    check_lr(lr)?;
    check_batch(n, b)?;
    check_momentum(m)?;
    if b == n {
        return Ok(NoiseScale(0.0));
    }
    Ok(NoiseScale(lr / (1.0 - m) * (n as f64 / b as f64 - 1.0)))
}

/// Large-N approximation `lr * N / (B * (1 - m))`, the quantity schedule
/// transformations hold fixed.
pub fn noise_scale_approx(lr: f64, n: usize, b: usize, m: f64) -> Result<f64> {
    check_lr(lr)?;
    check_batch(n, b)?;
    check_momentum(m)?;
    Ok(lr * n as f64 / (b as f64 * (1.0 - m)))
}

/// `lr / (1 - m)`.
pub fn effective_learning_rate(lr: f64, m: f64) -> Result<f64> {
    check_lr(lr)?;
    check_momentum(m)?;
    Ok(lr / (1.0 - m))
}

/// One constant-hyperparameter stretch of training, `[start_epoch, end_epoch)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub start_epoch: f64,
    pub end_epoch: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub momentum: f64,
}

impl Phase {
    pub fn new(start_epoch: f64, end_epoch: f64, lr: f64, batch_size: usize, momentum: f64) -> Self {
        Self {
            start_epoch,
            end_epoch,
            lr,
            batch_size,
            momentum,
        }
    }

    pub fn epochs(&self) -> f64 {
        self.end_epoch - self.start_epoch
    }

    fn whole_epochs(&self) -> u64 {
        self.epochs().round() as u64
    }

    pub fn noise_scale(&self, n: usize) -> Result<NoiseScale> {
        noise_scale(self.lr, n, self.batch_size, self.momentum)
    }

    pub fn noise_scale_approx(&self, n: usize) -> Result<f64> {
        noise_scale_approx(self.lr, n, self.batch_size, self.momentum)
    }

    pub fn effective_lr(&self) -> f64 {
        self.lr / (1.0 - self.momentum)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.start_epoch.is_finite() && self.end_epoch.is_finite()) {
            return Err(Error::InvalidSchedule("phase epochs must be finite".into()));
        }
        if self.start_epoch < 0.0 || self.end_epoch <= self.start_epoch {
            return Err(Error::InvalidSchedule(format!(
                "phase [{}, {}) is empty or starts before epoch 0",
                self.start_epoch, self.end_epoch
            )));
        }
        for e in [self.start_epoch, self.end_epoch] {
            if (e - e.round()).abs() > EPOCH_ALIGN_TOL {
                return Err(Error::InvalidSchedule(format!(
                    "phase boundary {e} is not on an epoch boundary"
                )));
            }
        }
        check_lr(self.lr)?;
        check_momentum(self.momentum)?;
        if self.batch_size < 1 || self.batch_size > n {
            return Err(Error::InvalidSchedule(format!(
                "batch size {} outside [1, {n}]",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Ways of turning a decaying-learning-rate schedule into one that anneals
/// the noise scale through batch size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConversionMode {
    /// Keep the schedule as written.
    Decay,
    /// Grow the batch size at the first decay only, then decay the learning
    /// rate (the cap defaults to the batch size reached after that step).
    Hybrid,
    /// Grow the batch size at every decay, up to an optional cap.
    Increase,
}

impl ConversionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConversionMode::Decay => "decay",
            ConversionMode::Hybrid => "hybrid",
            ConversionMode::Increase => "increase",
        }
    }
}

impl fmt::Display for ConversionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConversionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decay" => Ok(Self::Decay),
            "hybrid" => Ok(Self::Hybrid),
            "increase" => Ok(Self::Increase),
            other => Err(Error::Config(format!(
                "unknown conversion mode {other:?} (expected decay, hybrid or increase)"
            ))),
        }
    }
}

/// How learning rates are extended past the end of a schedule (and shaped)
/// when forming Robbins-Monro partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrExtension {
    /// Hold the final phase's hyperparameters.
    HoldFinal,
    /// Divide the phase learning rate by the 1-based update index.
    Harmonic,
}

/// Noise scale at the first update of a phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePoint {
    pub update_index: u64,
    pub epoch: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub g: f64,
    pub g_approx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobbinsMonro {
    pub horizon: u64,
    pub sum_lr: f64,
    pub sum_lr_sq: f64,
    pub g_trajectory: Vec<NoisePoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    dataset_size: usize,
    total_epochs: f64,
    phases: Vec<Phase>,
}

impl TryFrom<ScheduleDoc> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        Schedule::new(doc.dataset_size, doc.total_epochs, doc.phases)
    }
}

/// Validated, epoch-aligned schedule over a dataset of `dataset_size`
/// examples.
///
/// Serialises as
/// `{dataset_size, total_epochs, phases: [{start_epoch, end_epoch, lr, batch_size, momentum}]}`;
/// unknown fields are rejected on load and every loaded document is
/// validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDoc")]
pub struct Schedule {
    dataset_size: usize,
    total_epochs: f64,
    phases: Vec<Phase>,
}

impl Schedule {
    pub fn new(dataset_size: usize, total_epochs: f64, phases: Vec<Phase>) -> Result<Self> {
        if dataset_size < 1 {
            return Err(Error::InvalidSchedule("dataset size must be >= 1".into()));
        }
        if !(total_epochs.is_finite() && total_epochs >= 0.0)
            || (total_epochs - total_epochs.round()).abs() > EPOCH_ALIGN_TOL
        {
            return Err(Error::InvalidSchedule(format!(
                "total_epochs {total_epochs} must be a non-negative whole number"
            )));
        }
        let mut cursor = 0.0;
        for (i, p) in phases.iter().enumerate() {
            p.validate(dataset_size)
                .map_err(|e| Error::InvalidSchedule(format!("phase {i}: {e}")))?;
            if (p.start_epoch - cursor).abs() > EPOCH_ALIGN_TOL {
                return Err(Error::InvalidSchedule(format!(
                    "phase {i} starts at {} but the previous phase ends at {cursor}",
                    p.start_epoch
                )));
            }
            cursor = p.end_epoch;
        }
        if (cursor - total_epochs).abs() > EPOCH_ALIGN_TOL {
            return Err(Error::InvalidSchedule(format!(
                "phases cover [0, {cursor}) but total_epochs is {total_epochs}"
            )));
        }
        Ok(Self {
            dataset_size,
            total_epochs,
            phases,
        })
    }

    pub fn constant(n: usize, epochs: usize, lr: f64, batch_size: usize, momentum: f64) -> Result<Self> {
        let phases = if epochs == 0 {
            Vec::new()
        } else {
            vec![Phase::new(0.0, epochs as f64, lr, batch_size, momentum)]
        };
        Self::new(n, epochs as f64, phases)
    }

    /// Step decay: the learning rate is divided by `factor` at each boundary.
    pub fn step_decay(
        n: usize,
        lr0: f64,
        batch_size: usize,
        momentum: f64,
        boundaries: &[usize],
        total_epochs: usize,
        factor: f64,
    ) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Domain(format!("decay factor {factor} must be > 0")));
        }
        let mut edges = vec![0];
        edges.extend_from_slice(boundaries);
        edges.push(total_epochs);
        let mut lr = lr0;
        let phases = edges
            .windows(2)
            .map(|w| {
                let p = Phase::new(w[0] as f64, w[1] as f64, lr, batch_size, momentum);
                lr /= factor;
                p
            })
            .collect();
        Self::new(n, total_epochs as f64, phases)
    }

    /// One phase per epoch with `lr0 * rate^epoch`.
    pub fn exponential_decay(
        n: usize,
        lr0: f64,
        rate: f64,
        batch_size: usize,
        momentum: f64,
        epochs: usize,
    ) -> Result<Self> {
        let phases = (0..epochs)
            .map(|e| Phase::new(e as f64, (e + 1) as f64, lr0 * rate.powi(e as i32), batch_size, momentum))
            .collect();
        Self::new(n, epochs as f64, phases)
    }

    /// One phase per epoch following a half cosine from `lr0` toward `lr_min`.
    pub fn cosine_decay(
        n: usize,
        lr0: f64,
        lr_min: f64,
        batch_size: usize,
        momentum: f64,
        epochs: usize,
    ) -> Result<Self> {
        let phases = (0..epochs)
            .map(|e| {
                let t = e as f64 / epochs as f64;
                let lr = lr_min + 0.5 * (lr0 - lr_min) * (1.0 + (std::f64::consts::PI * t).cos());
                Phase::new(e as f64, (e + 1) as f64, lr, batch_size, momentum)
            })
            .collect();
        Self::new(n, epochs as f64, phases)
    }

    /// The 200-epoch wide-ResNet CIFAR-10 schedule: lr 0.1 divided by 5 at
    /// epochs 60, 120 and 160, batch 128, momentum 0.9, N = 50000.
    pub fn wide_resnet_cifar10() -> Self {
        Self::step_decay(50_000, 0.1, 128, 0.9, &[60, 120, 160], 200, 5.0)
            .expect("reference schedule is valid")
    }

    /// The wide-ResNet shape rescaled by 1/10: 20 epochs, decays by 5 at
    /// epochs 6, 12 and 16.
    pub fn desk_scale(n: usize, lr0: f64, batch_size: usize, momentum: f64) -> Result<Self> {
        Self::step_decay(n, lr0, batch_size, momentum, &[6, 12, 16], 20, 5.0)
    }

    pub fn dataset_size(&self) -> usize {
        self.dataset_size
    }

    pub fn total_epochs(&self) -> f64 {
        self.total_epochs
    }

    pub fn num_epochs(&self) -> usize {
        self.total_epochs.round() as usize
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn initial_phase(&self) -> Option<&Phase> {
        self.phases.first()
    }

    pub fn max_batch_size(&self) -> Option<usize> {
        self.phases.iter().map(|p| p.batch_size).max()
    }

    /// Phase governing whole epoch `epoch`; past the end the final phase
    /// is returned.
    pub fn phase_for_epoch(&self, epoch: usize) -> Option<&Phase> {
        let e = epoch as f64;
        self.phases
            .iter()
            .find(|p| e + EPOCH_ALIGN_TOL >= p.start_epoch && e + EPOCH_ALIGN_TOL < p.end_epoch)
            .or_else(|| self.phases.last())
    }

    /// Number of optimizer steps in one epoch at batch size `b`: `ceil(N / B)`.
    pub fn updates_per_epoch(&self, b: usize) -> u64 {
        self.dataset_size.div_ceil(b) as u64
    }

    pub fn noise_scales(&self) -> Vec<NoiseScale> {
        self.phases
            .iter()
            .map(|p| p.noise_scale(self.dataset_size).expect("validated phase"))
            .collect()
    }

    pub fn noise_scales_approx(&self) -> Vec<f64> {
        self.phases
            .iter()
            .map(|p| p.noise_scale_approx(self.dataset_size).expect("validated phase"))
            .collect()
    }

    /// Expected update count `sum(epochs * N / B)` as an exact rational.
    pub fn update_count_ratio(&self) -> Ratio<u64> {
        let n = self.dataset_size as u64;
        self.phases
            .iter()
            .map(|p| Ratio::new(p.whole_epochs() * n, p.batch_size as u64))
            .fold(Ratio::from_integer(0), |acc, r| acc + r)
    }

    /// [`update_count_ratio`](Self::update_count_ratio) as a float.
    pub fn update_count_exact(&self) -> f64 {
        let r = self.update_count_ratio();
        *r.numer() as f64 / *r.denom() as f64
    }

    /// Updates actually executed: `ceil(N / B)` per epoch, the last batch of
    /// each epoch running at its true (possibly smaller) size.
    pub fn update_count(&self) -> u64 {
        self.phases
            .iter()
            .map(|p| p.whole_epochs() * self.updates_per_epoch(p.batch_size))
            .sum()
    }

    /// Cap that [`ConversionMode::Hybrid`] uses when none is given: the batch
    /// size reached by converting the first decay.
    pub fn hybrid_cap(&self) -> usize {
        match self.phases.as_slice() {
            [first, second, ..] => {
                let b = (second.batch_size as f64 * first.lr / second.lr).round() as usize;
                b.clamp(first.batch_size, self.dataset_size)
            }
            [only] => only.batch_size,
            [] => 1,
        }
    }

    pub fn apply_conversion(&self, mode: ConversionMode, b_max: Option<usize>) -> Result<Self> {
        match mode {
            ConversionMode::Decay => Ok(self.clone()),
            ConversionMode::Increase => self.convert_to_batch_increase(b_max),
            ConversionMode::Hybrid => {
                self.convert_to_batch_increase(Some(b_max.unwrap_or_else(|| self.hybrid_cap())))
            }
        }
    }

    /// Replace learning-rate decay by batch-size growth.
    ///
    /// The first phase is kept. For every later phase the batch size becomes
    /// `round(B_i * lr_0 / lr_i)`, clamped to `b_max` (and to `N`), and the
    /// learning rate becomes `lr_i * B_new / B_i` so that `lr / (B (1 - m))`
    /// matches the original phase. While the cap does not bind the learning
    /// rate stays at `lr_0`; once it binds the learning rate takes over the
    /// remaining decay.
    pub fn convert_to_batch_increase(&self, b_max: Option<usize>) -> Result<Self> {
        let Some(first) = self.phases.first() else {
            return Ok(self.clone());
        };
        if let Some(cap) = b_max {
            if cap < first.batch_size {
                return Err(Error::InvalidCap {
                    b_max: cap,
                    initial: first.batch_size,
                });
            }
        }
        let cap = b_max.unwrap_or(self.dataset_size).min(self.dataset_size);
        let held_lr = first.lr;
        let phases = self
            .phases
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 0 {
                    return p.clone();
                }
                let ideal = p.batch_size as f64 * held_lr / p.lr;
                let b = (ideal.round() as usize).clamp(1, cap);
                let lr = p.lr * (b as f64 / p.batch_size as f64);
                Phase { lr, batch_size: b, ..p.clone() }
            })
            .collect();
        Self::new(self.dataset_size, self.total_epochs, phases)
    }

    /// Linear scaling rule: multiply every learning rate and batch size by
    /// `k`. Batch sizes are rounded and the learning rate absorbs the
    /// remainder.
    pub fn apply_linear_scaling(&self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!("scaling factor {k} must be finite and > 0")));
        }
        let phases = self
            .phases
            .iter()
            .map(|p| {
                let b = self.rescaled_batch(p.batch_size as f64 * k)?;
                Ok(Phase {
                    lr: p.lr * (b as f64 / p.batch_size as f64),
                    batch_size: b,
                    ..p.clone()
                })
            })
            .collect::<Result<_>>()?;
        Self::new(self.dataset_size, self.total_epochs, phases)
    }

    /// Multiply every learning rate by `k`, leaving batch sizes alone.
    pub fn scale_learning_rates(&self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Domain(format!("scaling factor {k} must be finite and > 0")));
        }
        let phases = self
            .phases
            .iter()
            .map(|p| Phase { lr: p.lr * k, ..p.clone() })
            .collect();
        Self::new(self.dataset_size, self.total_epochs, phases)
    }

    /// Replace every phase's momentum by `m_new` and scale its batch size by
    /// `(1 - m_old) / (1 - m_new)`, keeping `lr / (B (1 - m))` fixed.
    pub fn apply_momentum_scaling(&self, m_new: f64) -> Result<Self> {
        check_momentum(m_new)?;
        let phases = self
            .phases
            .iter()
            .map(|p| {
                if p.momentum == m_new {
                    return Ok(p.clone());
                }
                let factor = (1.0 - p.momentum) / (1.0 - m_new);
                let b = self.rescaled_batch(p.batch_size as f64 * factor)?;
                let lr = p.lr * (b as f64 / p.batch_size as f64) / factor;
                Ok(Phase {
                    lr,
                    batch_size: b,
                    momentum: m_new,
                    ..p.clone()
                })
            })
            .collect::<Result<_>>()?;
        Self::new(self.dataset_size, self.total_epochs, phases)
    }

    /// Check that moving to momentum `m_new` with initial batch size
    /// `requested` preserves the noise scale; on success returns the
    /// momentum-scaled schedule.
    pub fn verify_momentum_rescale(&self, m_new: f64, requested: usize) -> Result<Self> {
        let scaled = self.apply_momentum_scaling(m_new)?;
        let Some(first) = scaled.phases.first() else {
            return Ok(scaled);
        };
        if first.batch_size != requested {
            return Err(Error::NotNoisePreserving {
                momentum: m_new,
                requested,
                preserving: first.batch_size,
                g_ratio: first.batch_size as f64 / requested as f64,
            });
        }
        Ok(scaled)
    }

    fn rescaled_batch(&self, raw: f64) -> Result<usize> {
        let b = raw.round();
        if b < 1.0 || b > self.dataset_size as f64 {
            return Err(Error::Domain(format!(
                "scaled batch size {raw} outside [1, {}]",
                self.dataset_size
            )));
        }
        Ok(b as usize)
    }

    /// Partial sums of `lr_i` and `lr_i^2` over the first `horizon` updates,
    /// with the noise scale at the first update of every phase reached.
    pub fn robbins_monro_diagnostic(&self, horizon: u64, extension: LrExtension) -> RobbinsMonro {
        let mut out = RobbinsMonro {
            horizon,
            sum_lr: 0.0,
            sum_lr_sq: 0.0,
            g_trajectory: Vec::new(),
        };
        if self.phases.is_empty() {
            return out;
        }
        let n = self.dataset_size;
        let mut i: u64 = 0;
        let mut epoch = 0usize;
        let mut current: Option<&Phase> = None;
        while i < horizon {
            let phase = self.phase_for_epoch(epoch).expect("non-empty schedule");
            let per_epoch = self.updates_per_epoch(phase.batch_size);
            for _ in 0..per_epoch {
                if i >= horizon {
                    break;
                }
                i += 1;
                let lr = match extension {
                    LrExtension::HoldFinal => phase.lr,
                    LrExtension::Harmonic => phase.lr / i as f64,
                };
                if current.is_none_or(|c| !std::ptr::eq(c, phase)) {
                    current = Some(phase);
                    out.g_trajectory.push(NoisePoint {
                        update_index: i,
                        epoch,
                        lr,
                        batch_size: phase.batch_size,
                        g: noise_scale(lr, n, phase.batch_size, phase.momentum)
                            .expect("validated phase")
                            .value(),
                        g_approx: noise_scale_approx(lr, n, phase.batch_size, phase.momentum)
                            .expect("validated phase"),
                    });
                }
                out.sum_lr += lr;
                out.sum_lr_sq += lr * lr;
            }
            epoch += 1;
        }
        out
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_pretty() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Closed forms for the growth of the momentum accumulation under a
/// constant gradient `G`, starting from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulationForecast {
    pub gradient: f64,
    pub momentum: f64,
    pub dataset_size: usize,
    pub batch_size: usize,
}

pub fn accumulation_forecast(gradient: f64, momentum: f64, n: usize, b: usize) -> Result<AccumulationForecast> {
    check_momentum(momentum)?;
    check_batch(n, b)?;
    Ok(AccumulationForecast {
        gradient,
        momentum,
        dataset_size: n,
        batch_size: b,
    })
}

impl AccumulationForecast {
    /// `G / (1 - m)`.
    pub fn steady_state(&self) -> f64 {
        self.gradient / (1.0 - self.momentum)
    }

    /// Exact solution of `A_s = m A_{s-1} + G`, `A_0 = 0`:
    /// `G (1 - m^s) / (1 - m)`.
    pub fn discrete(&self, s: u64) -> f64 {
        let ms = if s <= i32::MAX as u64 {
            self.momentum.powi(s as i32)
        } else {
            self.momentum.powf(s as f64)
        };
        self.gradient * (1.0 - ms) / (1.0 - self.momentum)
    }

    /// Solution of `dA/ds = -(1 - m) A + G`: `G / (1 - m) (1 - exp(-(1 - m) s))`.
    pub fn continuous(&self, s: f64) -> f64 {
        self.steady_state() * (1.0 - (-(1.0 - self.momentum) * s).exp())
    }

    /// [`continuous`](Self::continuous) with `s = (N / B) * epochs`.
    pub fn continuous_at_epochs(&self, epochs: f64) -> f64 {
        self.continuous(self.updates_per_epoch() * epochs)
    }

    pub fn updates_per_epoch(&self) -> f64 {
        self.dataset_size as f64 / self.batch_size as f64
    }

    /// Epochs forfeited while the accumulation grows in: `B / (N (1 - m))`.
    pub fn lost_epochs(&self) -> f64 {
        self.batch_size as f64 / (self.dataset_size as f64 * (1.0 - self.momentum))
    }

    /// `max_s |discrete(s) - continuous(s)| / steady_state` over integer
    /// `s` in `[0, horizon]`.
    pub fn max_relative_gap(&self, horizon: u64) -> f64 {
        let ss = self.steady_state();
        (0..=horizon)
            .map(|s| ((self.discrete(s) - self.continuous(s as f64)) / ss).abs())
            .fold(0.0, f64::max)
    }
}
