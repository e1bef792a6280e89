use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::emit::{emit_curves, CurveAxis, CurveFormat};
use crate::error::{Error, Result};
use crate::optimizer::Optimizer;
use crate::problem::{BatchPlan, Problem};
use crate::schedule::{noise_scale, Schedule};
use crate::seed;

/// A run is marked failed once the training loss exceeds this multiple of
/// its initial value (or stops being finite).
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// One evaluation point. Column names match the curve files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub epoch: f64,
    pub updates: u64,
    pub train_loss: f64,
    pub eval_metric: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_train_loss: f64,
    pub final_eval_metric: f64,
    pub total_updates: u64,
    pub wall_time_secs: f64,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// The experiment config restricted to this seed.
    pub config: ExperimentConfig,
    pub rows: Vec<CurveRow>,
    pub summary: RunSummary,
}

impl RunRecord {
    /// Equality of everything except wall-clock time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        self.seed == other.seed
            && self.config == other.config
            && self.rows == other.rows
            && RunSummary {
                wall_time_secs: 0.0,
                ..self.summary.clone()
            } == RunSummary {
                wall_time_secs: 0.0,
                ..other.summary.clone()
            }
    }
}

fn row(problem: &dyn Problem, params: &[f64], epoch: usize, updates: u64, lr: f64, batch_size: usize, momentum: f64) -> CurveRow {
    let n = problem.len();
    CurveRow {
        epoch: epoch as f64,
        updates,
        train_loss: problem.full_loss(params),
        eval_metric: problem.eval_metric(params),
        lr,
        batch_size,
        noise_scale: noise_scale(lr, n, batch_size, momentum).map_or(0.0, |g| g.value()),
    }
}

/// Train one seed. `schedule` must already be validated against the
/// problem.
pub fn train(problem: &dyn Problem, config: &ExperimentConfig, schedule: &Schedule, seed: u64) -> RunRecord {
    let started = Instant::now();
    let mut params = problem.init_params(seed);
    let mut grad = vec![0.0; problem.dim()];
    let mut opt = Optimizer::new(&config.optimizer, problem.dim());
    let mut plan = BatchPlan::new(problem.len(), seed::derive(seed, seed::stream::SAMPLER));

    // With no phases the initial row reports lr = 0 and a full batch.
    let (lr0, b0, m0) = schedule
        .initial_phase()
        .map_or((0.0, problem.len(), 0.0), |p| (p.lr, p.batch_size, p.momentum));
    let initial = row(problem, &params, 0, 0, lr0, b0, m0);
    let limit = DIVERGENCE_FACTOR * initial.train_loss.abs().max(1e-12);
    let mut rows = vec![initial];
    let mut failure = None;
    let mut updates = 0u64;
    let epochs = schedule.num_epochs();

    'epochs: for epoch in 0..epochs {
        let phase = schedule.phase_for_epoch(epoch).expect("non-empty schedule");
        if let Err(e) = plan.begin_epoch(epoch, phase.batch_size) {
            failure = Some(e.to_string());
            break;
        }
        while let Some(batch) = plan.next_batch() {
            problem.batch_grad(&params, batch, &mut grad);
            if let Err(e) = opt.step(&mut params, &grad, phase.lr, phase.momentum) {
                failure = Some(format!("diverged in epoch {epoch}: {e}"));
                break 'epochs;
            }
            updates += 1;
            if let Some(i) = params.iter().position(|w| !w.is_finite()) {
                failure = Some(format!("diverged in epoch {epoch}: parameter {i} is not finite"));
                break 'epochs;
            }
        }
        let done = epoch + 1;
        if done % config.eval_every == 0 || done == epochs {
            let r = row(problem, &params, done, updates, phase.lr, phase.batch_size, phase.momentum);
            if !(r.train_loss.is_finite() && r.train_loss <= limit) {
                failure = Some(format!(
                    "diverged by epoch {done}: training loss {} exceeds {DIVERGENCE_FACTOR:e} x initial",
                    r.train_loss
                ));
                break;
            }
            rows.push(r);
        }
    }

    let last = rows.last().expect("initial row");
    let summary = RunSummary {
        final_train_loss: last.train_loss,
        final_eval_metric: last.eval_metric,
        total_updates: updates,
        wall_time_secs: started.elapsed().as_secs_f64(),
        failed: failure.is_some(),
        failure,
    };
    RunRecord {
        seed,
        config: ExperimentConfig {
            seeds: vec![seed],
            ..config.clone()
        },
        rows,
        summary,
    }
}

/// Build every seed's problem and validate the config against it.
fn prepare(config: &ExperimentConfig) -> Result<(Schedule, Vec<Box<dyn Problem>>)> {
    if config.seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let problems = config
        .seeds
        .iter()
        .map(|&s| config.problem.build(config.data_seed.unwrap_or(s)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Config(_) | Error::Io { .. } => e,
            other => Error::Config(other.to_string()),
        })?;
    let schedule = config.validate(problems[0].len())?;
    Ok((schedule, problems))
}

/// One [`RunRecord`] per seed, in seed order. Runs execute in parallel;
/// each is sequential and deterministic given its seed.
pub fn run(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let (schedule, problems) = prepare(config)?;
    Ok(config
        .seeds
        .par_iter()
        .zip(problems.par_iter())
        .map(|(&seed, problem)| train(problem.as_ref(), config, &schedule, seed))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub total_updates_predicted: u64,
    pub runs: Vec<SeedSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    #[serde(flatten)]
    pub summary: RunSummary,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Run `config` and persist it under `out`:
///
/// ```text
/// out/config.json        snapshot of the config
/// out/runs/<seed>.csv    one curve file per seed
/// out/curves_by_epochs.csv
/// out/summary.json       written last, atomically
/// ```
///
/// The directory is created and the config written before any training,
/// so an unwritable destination fails fast.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Vec<RunRecord>> {
    let (schedule, problems) = prepare(config)?;
    std::fs::create_dir_all(out.join("runs")).map_err(|e| Error::io(out, e))?;
    let config_path = out.join("config.json");
    std::fs::write(&config_path, config.to_json_pretty() + "\n").map_err(|e| Error::io(&config_path, e))?;

    let records: Vec<RunRecord> = config
        .seeds
        .par_iter()
        .zip(problems.par_iter())
        .map(|(&seed, problem)| train(problem.as_ref(), config, &schedule, seed))
        .collect();

    emit_curves(&records, CurveFormat::Csv, CurveAxis::Epochs, out)?;
    let summary = ExperimentSummary {
        total_updates_predicted: schedule.update_count(),
        runs: records
            .iter()
            .map(|r| SeedSummary {
                seed: r.seed,
                summary: r.summary.clone(),
            })
            .collect(),
    };
    write_atomic(
        &out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    Ok(records)
}

/// Rerun a persisted experiment from its `config.json` into `out`.
pub fn rerun(experiment_dir: &Path, out: &Path) -> Result<Vec<RunRecord>> {
    let config = ExperimentConfig::read(&experiment_dir.join("config.json"))?;
    run_experiment(&config, out)
}

/// Path of the curve file for `seed` under an experiment directory.
pub fn run_csv_path(experiment_dir: &Path, seed: u64) -> PathBuf {
    experiment_dir.join("runs").join(format!("{seed}.csv"))
}
