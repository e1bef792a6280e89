use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{run, CurveRow, RunRecord};
use crate::error::{Error, Result};
use crate::schedule::{ConversionMode, Schedule};

/// Relative tolerance for "approximately X" bounds.
pub const APPROX_TOLERANCE: f64 = 0.05;

/// Two means agree when they differ by at most this many pooled standard
/// deviations.
pub const POOLED_SD_MULTIPLE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { n, mean, sd, min, max })
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// `sqrt((sd_a^2 + sd_b^2) / 2)`.
pub fn pooled_sd(a: &Stats, b: &Stats) -> f64 {
    ((a.sd * a.sd + b.sd * b.sd) / 2.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: ConversionMode,
    pub schedule: Schedule,
    pub predicted_updates: u64,
    pub predicted_updates_exact: f64,
    /// Updates of the first seed's run (identical across seeds).
    pub actual_updates: u64,
    /// Baseline updates divided by this mode's updates. The baseline is
    /// decay mode when present, else the first mode.
    pub savings_ratio: f64,
    pub failed_runs: usize,
    /// Over the runs that did not fail.
    pub train_loss: Option<Stats>,
    pub eval_metric: Option<Stats>,
    pub records: Vec<RunRecord>,
}

/// Agreement of one metric between two modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub a: ConversionMode,
    pub b: ConversionMode,
    pub metric: String,
    pub mean_diff: f64,
    pub pooled_sd: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub pairs: Vec<PairCheck>,
    /// Measured update ratio of each ordered pair equals the ratio of the
    /// predicted integer counts.
    pub update_ratios_match: bool,
}

impl Comparison {
    pub fn all_within(&self) -> bool {
        self.pairs.iter().all(|p| p.within)
    }
}

/// One point of an aligned learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedRow {
    pub mode: ConversionMode,
    pub seed: u64,
    #[serde(flatten)]
    pub row: CurveRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub modes: Vec<ModeSummary>,
    /// Absent when only one mode was run.
    pub comparison: Option<Comparison>,
}

impl ComparisonReport {
    pub fn mode(&self, mode: ConversionMode) -> Option<&ModeSummary> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    fn aligned(&self) -> Vec<AlignedRow> {
        self.modes
            .iter()
            .flat_map(|m| {
                m.records.iter().flat_map(move |r| {
                    r.rows.iter().map(move |row| AlignedRow {
                        mode: m.mode,
                        seed: r.seed,
                        row: row.clone(),
                    })
                })
            })
            .collect()
    }

    /// Every row of every run, ordered by epoch.
    pub fn aligned_by_epochs(&self) -> Vec<AlignedRow> {
        let mut rows = self.aligned();
        rows.sort_by(|a, b| a.row.epoch.total_cmp(&b.row.epoch));
        rows
    }

    /// Every row of every run, ordered by cumulative updates.
    pub fn aligned_by_updates(&self) -> Vec<AlignedRow> {
        let mut rows = self.aligned();
        rows.sort_by_key(|r| r.row.updates);
        rows
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let fmt = |st: &Option<Stats>| st.map_or("n/a".to_string(), |st| format!("{:.6} ± {:.6}", st.mean, st.sd));
        writeln!(
            s,
            "{:<9} {:>12} {:>12} {:>8} {:>7} {:>26} {:>26}",
            "mode", "updates", "predicted", "savings", "failed", "final train loss", "final eval metric"
        )
        .unwrap();
        for m in &self.modes {
            writeln!(
                s,
                "{:<9} {:>12} {:>12} {:>8.3} {:>7} {:>26} {:>26}",
                m.mode.as_str(),
                m.actual_updates,
                m.predicted_updates,
                m.savings_ratio,
                m.failed_runs,
                fmt(&m.train_loss),
                fmt(&m.eval_metric)
            )
            .unwrap();
        }
        if let Some(c) = &self.comparison {
            writeln!(s).unwrap();
            for p in &c.pairs {
                writeln!(
                    s,
                    "{} vs {} {}: |diff| {:.3e}, pooled sd {:.3e} -> {}",
                    p.a,
                    p.b,
                    p.metric,
                    p.mean_diff.abs(),
                    p.pooled_sd,
                    if p.within { "equivalent" } else { "DIFFERENT" }
                )
                .unwrap();
            }
            writeln!(
                s,
                "update ratios match prediction: {}",
                if c.update_ratios_match { "yes" } else { "NO" }
            )
            .unwrap();
        }
        s
    }
}

fn successful(records: &[RunRecord], f: impl Fn(&RunRecord) -> f64) -> Vec<f64> {
    records.iter().filter(|r| !r.summary.failed).map(f).collect()
}

fn pair_check(a: &ModeSummary, b: &ModeSummary, metric: &str, sa: Option<Stats>, sb: Option<Stats>) -> PairCheck {
    match (sa, sb) {
        (Some(sa), Some(sb)) => {
            let pooled = pooled_sd(&sa, &sb);
            let diff = sa.mean - sb.mean;
            PairCheck {
                a: a.mode,
                b: b.mode,
                metric: metric.into(),
                mean_diff: diff,
                pooled_sd: pooled,
                within: diff.abs() <= POOLED_SD_MULTIPLE * pooled,
            }
        }
        _ => PairCheck {
            a: a.mode,
            b: b.mode,
            metric: metric.into(),
            mean_diff: f64::NAN,
            pooled_sd: f64::NAN,
            within: false,
        },
    }
}

/// Train `base` once per conversion mode (the base's own conversion
/// directive supplies `b_max` for every mode) and summarise.
pub fn compare_schedules(base: &ExperimentConfig, modes: &[ConversionMode]) -> Result<ComparisonReport> {
    if modes.is_empty() {
        return Err(Error::Config("at least one mode is required".into()));
    }
    let b_max = base.conversion.and_then(|c| c.b_max);
    let configs: Vec<ExperimentConfig> = modes
        .iter()
        .map(|&m| base.clone().with_conversion(m, b_max))
        .collect();
    // Surface config errors before anything trains.
    let schedules = configs
        .iter()
        .map(|c| c.resolved_schedule().map_err(|e| Error::Config(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let records = configs.par_iter().map(run).collect::<Result<Vec<_>>>()?;

    let baseline_index = modes.iter().position(|&m| m == ConversionMode::Decay).unwrap_or(0);
    let baseline_updates = records[baseline_index][0].summary.total_updates as f64;
    let summaries: Vec<ModeSummary> = modes
        .iter()
        .zip(schedules)
        .zip(records)
        .map(|((&mode, schedule), recs)| {
            let actual = recs[0].summary.total_updates;
            ModeSummary {
                mode,
                predicted_updates: schedule.update_count(),
                predicted_updates_exact: schedule.update_count_exact(),
                actual_updates: actual,
                savings_ratio: baseline_updates / actual as f64,
                failed_runs: recs.iter().filter(|r| r.summary.failed).count(),
                train_loss: Stats::of(&successful(&recs, |r| r.summary.final_train_loss)),
                eval_metric: Stats::of(&successful(&recs, |r| r.summary.final_eval_metric)),
                schedule,
                records: recs,
            }
        })
        .collect();

    let comparison = (summaries.len() > 1).then(|| {
        let mut pairs = Vec::new();
        let mut ratios_match = true;
        for (i, a) in summaries.iter().enumerate() {
            for b in &summaries[i + 1..] {
                pairs.push(pair_check(a, b, "train_loss", a.train_loss, b.train_loss));
                pairs.push(pair_check(a, b, "eval_metric", a.eval_metric, b.eval_metric));
                let measured = Ratio::new(a.actual_updates, b.actual_updates);
                let predicted = Ratio::new(a.predicted_updates, b.predicted_updates);
                ratios_match &= measured == predicted;
            }
        }
        Comparison {
            pairs,
            update_ratios_match: ratios_match,
        }
    });
    Ok(ComparisonReport {
        modes: summaries,
        comparison,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrPoint {
    /// Requested initial learning rate.
    pub lr: f64,
    /// Ratio to the base schedule's initial learning rate.
    pub k: f64,
    /// Initial learning rate and batch size actually used.
    pub initial_lr: f64,
    pub initial_batch_size: usize,
    pub failed_runs: usize,
    /// Medians over the runs that did not fail; `None` when all failed.
    pub median_eval_metric: Option<f64>,
    pub median_train_loss: Option<f64>,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrSweepReport {
    pub scale_batch: bool,
    pub points: Vec<LrPoint>,
}

impl LrSweepReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        writeln!(
            s,
            "{:>10} {:>8} {:>8} {:>7} {:>16} {:>16}",
            "lr", "k", "batch", "failed", "median eval", "median loss"
        )
        .unwrap();
        for p in &self.points {
            writeln!(
                s,
                "{:>10.4} {:>8.3} {:>8} {:>7} {:>16} {:>16}",
                p.initial_lr,
                p.k,
                p.initial_batch_size,
                p.failed_runs,
                opt(p.median_eval_metric),
                opt(p.median_train_loss)
            )
            .unwrap();
        }
        s
    }
}

/// Sweep the initial learning rate of `base`. Every phase's learning rate
/// is multiplied by `k = lr / lr0`; with `scale_batch` every batch size is
/// multiplied by `k` as well. Diverging points are recorded, not raised.
pub fn lr_sweep(base: &ExperimentConfig, lr_values: &[f64], scale_batch: bool) -> Result<LrSweepReport> {
    let lr0 = base
        .schedule
        .initial_phase()
        .map(|p| p.lr)
        .ok_or_else(|| Error::Config("learning-rate sweep needs a non-empty schedule".into()))?;
    let configs = lr_values
        .iter()
        .map(|&lr| {
            let k = lr / lr0;
            let schedule = if scale_batch {
                base.schedule.apply_linear_scaling(k)
            } else {
                base.schedule.scale_learning_rates(k)
            }
            .map_err(|e| Error::Config(format!("lr {lr}: {e}")))?;
            Ok((lr, k, ExperimentConfig { schedule, ..base.clone() }))
        })
        .collect::<Result<Vec<_>>>()?;
    for (_, _, c) in &configs {
        c.resolved_schedule().map_err(|e| Error::Config(e.to_string()))?;
    }
    let points = configs
        .par_iter()
        .map(|(lr, k, cfg)| {
            let records = run(cfg)?;
            let first = cfg.schedule.initial_phase().expect("non-empty");
            Ok(LrPoint {
                lr: *lr,
                k: *k,
                initial_lr: first.lr,
                initial_batch_size: first.batch_size,
                failed_runs: records.iter().filter(|r| r.summary.failed).count(),
                median_eval_metric: median(&successful(&records, |r| r.summary.final_eval_metric)),
                median_train_loss: median(&successful(&records, |r| r.summary.final_train_loss)),
                records,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LrSweepReport { scale_batch, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    /// Within [`APPROX_TOLERANCE`] relative of the value.
    Approximately(f64),
    /// Strictly below the value.
    Under(f64),
}

impl Bound {
    pub fn holds(self, x: f64) -> bool {
        match self {
            Bound::Approximately(v) => ((x - v) / v).abs() <= APPROX_TOLERANCE,
            Bound::Under(v) => x < v,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Approximately(v) => write!(f, "~{v}"),
            Bound::Under(v) => write!(f, "< {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportedCount {
    pub name: &'static str,
    pub schedule: Schedule,
    pub exact: Ratio<u64>,
    pub updates: u64,
    pub bound: Bound,
}

impl ReportedCount {
    pub fn exact_f64(&self) -> f64 {
        *self.exact.numer() as f64 / *self.exact.denom() as f64
    }

    pub fn passes(&self) -> bool {
        self.bound.holds(self.exact_f64())
    }
}

/// Cap on the batch size used by the large-batch wide-ResNet schedules.
pub const WRN_B_MAX: usize = 5120;

/// The four wide-ResNet CIFAR-10 schedules and their reported update
/// budgets, plus the increasing schedule with the cap applied.
pub fn reported_counts() -> Vec<ReportedCount> {
    let original = Schedule::wide_resnet_cifar10();
    let increasing = original.convert_to_batch_increase(None).expect("valid");
    let increasing_capped = original.convert_to_batch_increase(Some(WRN_B_MAX)).expect("valid");
    let higher_lr = original
        .apply_linear_scaling(5.0)
        .and_then(|s| s.convert_to_batch_increase(Some(WRN_B_MAX)))
        .expect("valid");
    let higher_momentum = original
        .apply_linear_scaling(5.0)
        .and_then(|s| s.apply_momentum_scaling(0.98))
        .and_then(|s| s.convert_to_batch_increase(Some(WRN_B_MAX)))
        .expect("valid");
    [
        ("original", original, Bound::Approximately(80_000.0)),
        ("increasing batch size", increasing, Bound::Approximately(29_000.0)),
        (
            "increasing batch size (B_max 5120)",
            increasing_capped,
            Bound::Approximately(29_000.0),
        ),
        ("increased initial learning rate", higher_lr, Bound::Under(6_500.0)),
        ("increased momentum coefficient", higher_momentum, Bound::Under(2_500.0)),
    ]
    .into_iter()
    .map(|(name, schedule, bound)| ReportedCount {
        name,
        exact: schedule.update_count_ratio(),
        updates: schedule.update_count(),
        schedule,
        bound,
    })
    .collect()
}

pub fn render_reported_counts(rows: &[ReportedCount]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:<36} {:>22} {:>12} {:>10} {:>7}  result",
        "schedule", "batch sizes", "exact", "integer", "bound"
    )
    .unwrap();
    for r in rows {
        let batches = r
            .schedule
            .phases()
            .iter()
            .map(|p| p.batch_size.to_string())
            .collect::<Vec<_>>()
            .join("/");
        writeln!(
            s,
            "{:<36} {:>22} {:>12} {:>10} {:>7}  {}",
            r.name,
            batches,
            r.exact_f64(),
            r.updates,
            r.bound.to_string(),
            if r.passes() { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    s
}
