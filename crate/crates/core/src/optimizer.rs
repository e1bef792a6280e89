//! SGD, heavy-ball momentum, Nesterov momentum and Adam on flat `f64`
//! parameter vectors.
//!
//! Every step consumes the *mean* gradient per training example over the
//! batch. Momentum uses the accumulation convention
//!
//! ```text
//! A <- m A + grad
//! w <- w - lr A
//! ```
//!
//! with `A` updated before the parameter step, so `m = 0` is plain SGD and a
//! constant gradient `G` gives `A_s = G (1 - m^s) / (1 - m)`.
//!
//! Nesterov uses the same accumulation with the look-ahead folded into the
//! step, `w <- w - lr (m A + grad)`, where `grad` is taken at the current
//! parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON_STABILITY: f64 = 1e-8;

fn check_grad(params: &[f64], grad: &[f64]) -> Result<()> {
    if params.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            actual: grad.len(),
        });
    }
    if let Some((index, &value)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index, value });
    }
    Ok(())
}

/// `w <- w - lr * grad`.
pub fn sgd_step(params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
    check_grad(params, grad)?;
    for (w, g) in params.iter_mut().zip(grad) {
        *w -= lr * g;
    }
    Ok(())
}

/// `A <- m A + grad`, then `w <- w - lr * A`.
pub fn momentum_step(accumulation: &mut [f64], params: &mut [f64], grad: &[f64], lr: f64, m: f64) -> Result<()> {
    check_grad(params, grad)?;
    check_grad(accumulation, grad)?;
    for ((a, w), g) in accumulation.iter_mut().zip(params.iter_mut()).zip(grad) {
        *a = m * *a + g;
        *w -= lr * *a;
    }
    Ok(())
}

/// `A <- m A + grad`, then `w <- w - lr * (m A + grad)`.
pub fn nesterov_step(accumulation: &mut [f64], params: &mut [f64], grad: &[f64], lr: f64, m: f64) -> Result<()> {
    check_grad(params, grad)?;
    check_grad(accumulation, grad)?;
    for ((a, w), g) in accumulation.iter_mut().zip(params.iter_mut()).zip(grad) {
        *a = m * *a + g;
        *w -= lr * (m * *a + g);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_stability: f64,
    pub bias_correction: bool,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon_stability: DEFAULT_EPSILON_STABILITY,
            bias_correction: true,
        }
    }
}

impl AdamParams {
    fn validate(&self) -> Result<()> {
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Domain(format!("{name} = {b} outside [0, 1)")));
            }
        }
        if self.epsilon_stability.is_nan() || self.epsilon_stability <= 0.0 {
            return Err(Error::Domain(format!(
                "epsilon_stability = {} must be > 0",
                self.epsilon_stability
            )));
        }
        Ok(())
    }
}

/// Adam moments and step counter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamMoments {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub step: u64,
}

impl AdamMoments {
    pub fn zeros(dim: usize) -> Self {
        Self {
            first: vec![0.0; dim],
            second: vec![0.0; dim],
            step: 0,
        }
    }
}

/// One Adam step. The stability constant is added outside the square root.
pub fn adam_step(moments: &mut AdamMoments, params: &mut [f64], grad: &[f64], lr: f64, hp: &AdamParams) -> Result<()> {
    hp.validate()?;
    check_grad(params, grad)?;
    check_grad(&moments.first, grad)?;
    moments.step += 1;
    let (c1, c2) = if hp.bias_correction {
        let t = moments.step.min(i32::MAX as u64) as i32;
        (1.0 - hp.beta1.powi(t), 1.0 - hp.beta2.powi(t))
    } else {
        (1.0, 1.0)
    };
    for (((w, g), mo), v) in params
        .iter_mut()
        .zip(grad)
        .zip(moments.first.iter_mut())
        .zip(moments.second.iter_mut())
    {
        *mo = hp.beta1 * *mo + (1.0 - hp.beta1) * g;
        *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
        let m_hat = *mo / c1;
        let v_hat = *v / c2;
        *w -= lr * m_hat / (v_hat.sqrt() + hp.epsilon_stability);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Momentum,
    Nesterov,
    Adam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 4] = [Self::Sgd, Self::Momentum, Self::Nesterov, Self::Adam];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Momentum => "momentum",
            Self::Nesterov => "nesterov",
            Self::Adam => "adam",
        }
    }

    /// Whether the schedule's momentum coefficient drives this optimizer.
    pub fn uses_momentum(self) -> bool {
        matches!(self, Self::Momentum | Self::Nesterov)
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_beta1() -> f64 {
    DEFAULT_BETA1
}
fn default_beta2() -> f64 {
    DEFAULT_BETA2
}
fn default_epsilon_stability() -> f64 {
    DEFAULT_EPSILON_STABILITY
}
fn default_true() -> bool {
    true
}

/// Optimizer section of an experiment config.
///
/// `momentum`, when present, must agree with every schedule phase for the
/// momentum optimizers; the schedule's per-phase coefficient is what the
/// training loop uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub optimizer: OptimizerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon_stability")]
    pub epsilon_stability: f64,
    #[serde(default = "default_true")]
    pub bias_correction: bool,
}

impl OptimizerConfig {
    pub fn new(optimizer: OptimizerKind) -> Self {
        Self {
            optimizer,
            momentum: None,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon_stability: DEFAULT_EPSILON_STABILITY,
            bias_correction: true,
        }
    }

    pub fn adam_params(&self) -> AdamParams {
        AdamParams {
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon_stability: self.epsilon_stability,
            bias_correction: self.bias_correction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.momentum {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::Config(format!("optimizer momentum {m} outside [0, 1)")));
            }
        }
        self.adam_params()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slots {
    Sgd,
    Accumulation(Vec<f64>),
    Adam(AdamMoments),
}

/// Optimizer with its state. Owned by one training loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    adam: AdamParams,
    slots: Slots,
}

impl Optimizer {
    pub fn new(config: &OptimizerConfig, dim: usize) -> Self {
        let slots = match config.optimizer {
            OptimizerKind::Sgd => Slots::Sgd,
            OptimizerKind::Momentum | OptimizerKind::Nesterov => Slots::Accumulation(vec![0.0; dim]),
            OptimizerKind::Adam => Slots::Adam(AdamMoments::zeros(dim)),
        };
        Self {
            kind: config.optimizer,
            adam: config.adam_params(),
            slots,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// Momentum accumulation, for the momentum optimizers.
    pub fn accumulation(&self) -> Option<&[f64]> {
        match &self.slots {
            Slots::Accumulation(a) => Some(a),
            _ => None,
        }
    }

    pub fn accumulation_mut(&mut self) -> Option<&mut [f64]> {
        match &mut self.slots {
            Slots::Accumulation(a) => Some(a),
            _ => None,
        }
    }

    pub fn adam_moments(&self) -> Option<&AdamMoments> {
        match &self.slots {
            Slots::Adam(m) => Some(m),
            _ => None,
        }
    }

    /// Apply one update with learning rate `lr`; `momentum` is ignored by
    /// SGD and Adam.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, momentum: f64) -> Result<()> {
        match (&mut self.slots, self.kind) {
            (Slots::Sgd, _) => sgd_step(params, grad, lr),
            (Slots::Accumulation(a), OptimizerKind::Nesterov) => nesterov_step(a, params, grad, lr, momentum),
            (Slots::Accumulation(a), _) => momentum_step(a, params, grad, lr, momentum),
            (Slots::Adam(m), _) => adam_step(m, params, grad, lr, &self.adam),
        }
    }
}
