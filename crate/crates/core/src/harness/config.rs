use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::problem::{
    make_logistic_synthetic, make_noisy_quadratic, make_tiny_mlp, Dataset, LogisticProblem, MlpProblem, Problem,
};
use crate::schedule::{ConversionMode, Schedule};

/// Which objective to train. Synthetic problems are regenerated from each
/// run's seed; CSV problems load fixed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        lambda: f64,
        sigma: f64,
        n: usize,
        dim: usize,
    },
    Logistic {
        n: usize,
        dim: usize,
        class_separation: f64,
    },
    Mlp {
        n: usize,
        dim: usize,
        hidden_units: usize,
    },
    LogisticCsv {
        train: PathBuf,
        held_out: PathBuf,
        #[serde(default)]
        has_header: bool,
    },
    MlpCsv {
        train: PathBuf,
        held_out: PathBuf,
        #[serde(default)]
        has_header: bool,
        hidden_units: usize,
        classes: usize,
    },
}

impl ProblemSpec {
    pub fn build(&self, seed: u64) -> Result<Box<dyn Problem>> {
        Ok(match self {
            ProblemSpec::Quadratic { lambda, sigma, n, dim } => {
                Box::new(make_noisy_quadratic(*lambda, *sigma, *n, *dim, seed)?)
            }
            ProblemSpec::Logistic {
                n,
                dim,
                class_separation,
            } => Box::new(make_logistic_synthetic(*n, *dim, *class_separation, seed)?),
            ProblemSpec::Mlp { n, dim, hidden_units } => Box::new(make_tiny_mlp(*n, *dim, *hidden_units, seed)?),
            ProblemSpec::LogisticCsv {
                train,
                held_out,
                has_header,
            } => Box::new(LogisticProblem::from_datasets(
                Dataset::from_csv(train, *has_header)?,
                Dataset::from_csv(held_out, *has_header)?,
            )?),
            ProblemSpec::MlpCsv {
                train,
                held_out,
                has_header,
                hidden_units,
                classes,
            } => Box::new(MlpProblem::from_datasets(
                Dataset::from_csv(train, *has_header)?,
                Dataset::from_csv(held_out, *has_header)?,
                *hidden_units,
                *classes,
            )?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conversion {
    pub mode: ConversionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_max: Option<usize>,
}

fn default_eval_every() -> usize {
    1
}

/// A training experiment: one run per seed of `optimizer` on `problem`
/// following `schedule` (optionally converted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub optimizer: OptimizerConfig,
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversion: Option<Conversion>,
    pub seeds: Vec<u64>,
    /// Generate synthetic data from this seed for every run, so that seeds
    /// vary only initialisation and batch order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_seed: Option<u64>,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, optimizer: OptimizerConfig, schedule: Schedule, seeds: Vec<u64>) -> Self {
        Self {
            problem,
            optimizer,
            schedule,
            conversion: None,
            seeds,
            data_seed: None,
            eval_every: 1,
            output_dir: None,
        }
    }

    pub fn with_conversion(mut self, mode: ConversionMode, b_max: Option<usize>) -> Self {
        self.conversion = Some(Conversion { mode, b_max });
        self
    }

    pub fn with_data_seed(mut self, seed: u64) -> Self {
        self.data_seed = Some(seed);
        self
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// The schedule actually trained, after any conversion directive.
    pub fn resolved_schedule(&self) -> Result<Schedule> {
        match self.conversion {
            None => Ok(self.schedule.clone()),
            Some(c) => self.schedule.apply_conversion(c.mode, c.b_max),
        }
    }

    /// Check everything that can be checked without training. `n` is the
    /// training set size of the built problem.
    pub fn validate(&self, n: usize) -> Result<Schedule> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be >= 1".into()));
        }
        self.optimizer.validate()?;
        if self.schedule.dataset_size() != n {
            return Err(Error::Config(format!(
                "schedule dataset_size {} does not match the problem's {n} training examples",
                self.schedule.dataset_size()
            )));
        }
        let schedule = self.resolved_schedule().map_err(|e| Error::Config(e.to_string()))?;
        let kind = self.optimizer.optimizer;
        for (i, p) in schedule.phases().iter().enumerate() {
            if kind.uses_momentum() {
                if let Some(m) = self.optimizer.momentum {
                    if p.momentum != m {
                        return Err(Error::Config(format!(
                            "phase {i} has momentum {} but the optimizer is configured with {m}",
                            p.momentum
                        )));
                    }
                }
            } else if p.momentum != 0.0 {
                return Err(Error::Config(format!(
                    "phase {i} has momentum {} but {kind} takes no momentum coefficient",
                    p.momentum
                )));
            }
        }
        Ok(schedule)
    }
}
