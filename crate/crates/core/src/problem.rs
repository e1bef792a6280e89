//! Desk-scale objectives with per-example losses and gradients.
//!
//! Losses are per-example; the training objective is their mean over the
//! dataset, and every gradient handed to an optimizer is the mean gradient
//! per example over the batch. Relative to a summed-loss convention this
//! rescales learning rates by a factor of `N`.
//!
//! The [`BatchPlan`] sampler draws without replacement: each epoch is a fresh
//! seeded permutation cut into batches of the current size, with a shorter
//! final batch when `B` does not divide `N`. The noise-scale formula assumes
//! independent batches; one short batch per epoch is a negligible deviation
//! at these sizes.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed;

/// Row-major feature matrix with one target per example.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, features: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Config("dataset must contain at least one example".into()));
        }
        if features.len() != dim * targets.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * targets.len(),
                actual: features.len(),
            });
        }
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite feature in example {}",
                i / dim.max(1)
            )));
        }
        Ok(Self {
            dim,
            features,
            targets,
        })
    }

    /// Read comma-separated examples, features first and target last.
    pub fn from_csv(path: &Path, has_header: bool) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => Error::Config(format!("cannot open {}: {e}", path.display())),
                _ => Error::Csv(e),
            })?;
        let mut dim = None;
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let values = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Config(format!("record {line}: cannot parse {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let (target, row) = values
                .split_last()
                .ok_or_else(|| Error::Config(format!("record {line} is empty")))?;
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::Config(format!(
                        "record {line} has {} features, expected {d}",
                        row.len()
                    )))
                }
                _ => {}
            }
            features.extend_from_slice(row);
            targets.push(*target);
        }
        Self::new(dim.unwrap_or(0), features, targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }
}

/// A differentiable objective over a finite training set.
pub trait Problem: Send + Sync {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// Training set size `N`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn loss(&self, params: &[f64], index: usize) -> f64;

    /// Add `scale * d loss_index / d params` into `out`, returning the loss.
    fn accumulate_grad(&self, params: &[f64], index: usize, scale: f64, out: &mut [f64]) -> f64;

    /// Metric on held-out data (accuracy for classifiers).
    fn eval_metric(&self, params: &[f64]) -> f64;

    /// Initial parameters for a run seeded with `seed`.
    fn init_params(&self, seed: u64) -> Vec<f64>;

    fn grad(&self, params: &[f64], index: usize) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.accumulate_grad(params, index, 1.0, &mut g);
        g
    }

    /// Overwrite `out` with the mean gradient over `indices`; returns the
    /// mean loss.
    fn batch_grad(&self, params: &[f64], indices: &[usize], out: &mut [f64]) -> f64 {
        out.fill(0.0);
        let scale = 1.0 / indices.len() as f64;
        let mut loss = 0.0;
        for &i in indices {
            loss += self.accumulate_grad(params, i, scale, out);
        }
        loss * scale
    }

    /// `(1/N) sum_i loss_i`.
    fn full_loss(&self, params: &[f64]) -> f64 {
        let n = self.len();
        (0..n).map(|i| self.loss(params, i)).sum::<f64>() / n as f64
    }

    fn full_grad(&self, params: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        let mut g = vec![0.0; self.dim()];
        self.batch_grad(params, &all, &mut g);
        g
    }
}

fn gaussian_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `loss_i = lambda/2 * |w - x_i|^2` with `x_i ~ N(1, sigma^2 I)`.
///
/// The full-batch minimum is the sample mean. Starts from `w = 0`; the
/// held-out metric is the squared distance to the minimum.
#[derive(Debug, Clone)]
pub struct NoisyQuadratic {
    lambda: f64,
    sigma: f64,
    data: Dataset,
    mean: Vec<f64>,
    spread: f64,
}

pub fn make_noisy_quadratic(lambda: f64, sigma: f64, n: usize, dim: usize, seed: u64) -> Result<NoisyQuadratic> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("curvature {lambda} must be > 0")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Domain(format!("spread {sigma} must be >= 0")));
    }
    if n == 0 || dim == 0 {
        return Err(Error::Domain("dataset size and dimension must be >= 1".into()));
    }
    let mut rng = seed::rng(seed, seed::stream::DATA);
    let features: Vec<f64> = gaussian_vec(&mut rng, n * dim, sigma)
        .into_iter()
        .map(|z| 1.0 + z)
        .collect();
    let data = Dataset::new(dim, features, vec![0.0; n])?;
    Ok(NoisyQuadratic::from_dataset(lambda, sigma, data))
}

impl NoisyQuadratic {
    pub fn from_dataset(lambda: f64, sigma: f64, data: Dataset) -> Self {
        let (n, d) = (data.len(), data.dim());
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, x) in mean.iter_mut().zip(data.features(i)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let spread = (0..n)
            .map(|i| {
                data.features(i)
                    .iter()
                    .zip(&mean)
                    .map(|(x, m)| (x - m) * (x - m))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n as f64;
        Self {
            lambda,
            sigma,
            data,
            mean,
            spread,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Full-batch minimiser (the sample mean).
    pub fn minimum(&self) -> &[f64] {
        &self.mean
    }

    /// `|w - x_bar|^2`.
    pub fn distance_sq(&self, params: &[f64]) -> f64 {
        params.iter().zip(&self.mean).map(|(w, m)| (w - m) * (w - m)).sum()
    }

    /// Closed form of [`Problem::full_loss`]:
    /// `lambda/2 (|w - x_bar|^2 + mean |x_i - x_bar|^2)`.
    pub fn full_loss_closed_form(&self, params: &[f64]) -> f64 {
        0.5 * self.lambda * (self.distance_sq(params) + self.spread)
    }
}

impl Problem for NoisyQuadratic {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn len(&self) -> usize {
        self.data.len()
    }

    fn loss(&self, params: &[f64], index: usize) -> f64 {
        let x = self.data.features(index);
        0.5 * self.lambda * params.iter().zip(x).map(|(w, x)| (w - x) * (w - x)).sum::<f64>()
    }

    fn accumulate_grad(&self, params: &[f64], index: usize, scale: f64, out: &mut [f64]) -> f64 {
        let x = self.data.features(index);
        let mut loss = 0.0;
        for ((o, w), xi) in out.iter_mut().zip(params).zip(x) {
            let r = w - xi;
            loss += r * r;
            *o += scale * self.lambda * r;
        }
        0.5 * self.lambda * loss
    }

    fn eval_metric(&self, params: &[f64]) -> f64 {
        self.distance_sq(params)
    }

    fn init_params(&self, _seed: u64) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary logistic regression with cross-entropy loss. Parameters are the
/// feature weights followed by a bias.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    train: Dataset,
    held_out: Dataset,
}

/// Two unit-variance Gaussian blobs whose means differ by
/// `class_separation` along the first axis, `N/2` examples each, plus a
/// held-out set of `N/4` examples.
pub fn make_logistic_synthetic(n: usize, dim: usize, class_separation: f64, seed: u64) -> Result<LogisticProblem> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Domain(format!("dataset size {n} must be even and >= 2")));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    if !class_separation.is_finite() || class_separation < 0.0 {
        return Err(Error::Domain(format!("class separation {class_separation} must be >= 0")));
    }
    let mut rng = seed::rng(seed, seed::stream::DATA);
    let mut blobs = |count: usize| {
        let mut features = gaussian_vec(&mut rng, count * dim, 1.0);
        let targets: Vec<f64> = (0..count).map(|i| (i % 2) as f64).collect();
        for (i, y) in targets.iter().enumerate() {
            features[i * dim] += (y - 0.5) * class_separation;
        }
        Dataset::new(dim, features, targets)
    };
    let train = blobs(n)?;
    let held_out = blobs((n / 4).max(1))?;
    Ok(LogisticProblem { train, held_out })
}

impl LogisticProblem {
    pub fn from_datasets(train: Dataset, held_out: Dataset) -> Result<Self> {
        if train.dim() != held_out.dim() {
            return Err(Error::DimensionMismatch {
                expected: train.dim(),
                actual: held_out.dim(),
            });
        }
        for d in [&train, &held_out] {
            if (0..d.len()).any(|i| d.target(i) != 0.0 && d.target(i) != 1.0) {
                return Err(Error::Config("logistic targets must be 0 or 1".into()));
            }
        }
        Ok(Self { train, held_out })
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    pub fn held_out(&self) -> &Dataset {
        &self.held_out
    }

    fn logit(&self, params: &[f64], x: &[f64]) -> f64 {
        let (w, b) = params.split_at(x.len());
        w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b[0]
    }

    pub fn accuracy(&self, params: &[f64], data: &Dataset) -> f64 {
        let correct = (0..data.len())
            .filter(|&i| (self.logit(params, data.features(i)) > 0.0) == (data.target(i) == 1.0))
            .count();
        correct as f64 / data.len() as f64
    }
}

impl Problem for LogisticProblem {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn dim(&self) -> usize {
        self.train.dim() + 1
    }

    fn len(&self) -> usize {
        self.train.len()
    }

    fn loss(&self, params: &[f64], index: usize) -> f64 {
        let z = self.logit(params, self.train.features(index));
        log1p_exp(z) - self.train.target(index) * z
    }

    fn accumulate_grad(&self, params: &[f64], index: usize, scale: f64, out: &mut [f64]) -> f64 {
        let x = self.train.features(index);
        let y = self.train.target(index);
        let z = self.logit(params, x);
        let r = scale * (sigmoid(z) - y);
        let (ow, ob) = out.split_at_mut(x.len());
        for (o, xi) in ow.iter_mut().zip(x) {
            *o += r * xi;
        }
        ob[0] += r;
        log1p_exp(z) - y * z
    }

    fn eval_metric(&self, params: &[f64]) -> f64 {
        self.accuracy(params, &self.held_out)
    }

    fn init_params(&self, _seed: u64) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

pub const SPIRAL_CLASSES: usize = 3;

/// One-hidden-layer tanh network with a softmax cross-entropy head and a
/// hand-written backward pass.
///
/// Parameter layout: `W1` (`hidden x input`, row-major), `b1`, `W2`
/// (`classes x hidden`), `b2`.
#[derive(Debug, Clone)]
pub struct MlpProblem {
    train: Dataset,
    held_out: Dataset,
    hidden: usize,
    classes: usize,
}

/// Interleaved spirals, one arm per class, in the first two input
/// coordinates; further coordinates carry small Gaussian noise. `N/4`
/// held-out points are drawn from the same distribution.
pub fn make_tiny_mlp(n: usize, dim: usize, hidden_units: usize, seed: u64) -> Result<MlpProblem> {
    if hidden_units == 0 {
        return Err(Error::Domain("hidden_units must be >= 1".into()));
    }
    if dim < 2 {
        return Err(Error::Domain("spiral inputs need at least 2 dimensions".into()));
    }
    if n == 0 {
        return Err(Error::Domain("dataset size must be >= 1".into()));
    }
    let mut rng = seed::rng(seed, seed::stream::DATA);
    let mut spirals = |count: usize| {
        let mut features = Vec::with_capacity(count * dim);
        let mut targets = Vec::with_capacity(count);
        for i in 0..count {
            let class = i % SPIRAL_CLASSES;
            let t: f64 = rng.random();
            let noise: f64 = rng.sample(StandardNormal);
            let angle = class as f64 * std::f64::consts::TAU / SPIRAL_CLASSES as f64 + 4.0 * t + 0.2 * noise;
            features.push(t * angle.cos());
            features.push(t * angle.sin());
            for _ in 2..dim {
                features.push(0.1 * rng.sample::<f64, _>(StandardNormal));
            }
            targets.push(class as f64);
        }
        Dataset::new(dim, features, targets)
    };
    let train = spirals(n)?;
    let held_out = spirals((n / 4).max(1))?;
    Ok(MlpProblem {
        train,
        held_out,
        hidden: hidden_units,
        classes: SPIRAL_CLASSES,
    })
}

impl MlpProblem {
    pub fn from_datasets(train: Dataset, held_out: Dataset, hidden: usize, classes: usize) -> Result<Self> {
        if hidden == 0 || classes < 2 {
            return Err(Error::Config("mlp needs hidden >= 1 and classes >= 2".into()));
        }
        if train.dim() != held_out.dim() {
            return Err(Error::DimensionMismatch {
                expected: train.dim(),
                actual: held_out.dim(),
            });
        }
        for d in [&train, &held_out] {
            if (0..d.len()).any(|i| {
                let t = d.target(i);
                t.fract() != 0.0 || t < 0.0 || t >= classes as f64
            }) {
                return Err(Error::Config(format!("mlp targets must be class indices in 0..{classes}")));
            }
        }
        Ok(Self {
            train,
            held_out,
            hidden,
            classes,
        })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    fn input(&self) -> usize {
        self.train.dim()
    }

    fn split<'a>(&self, params: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (d, h) = (self.input(), self.hidden);
        let (w1, rest) = params.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(self.classes * h);
        (w1, b1, w2, b2)
    }

    /// Forward pass into `scratch` (`hidden` activations then `classes`
    /// probabilities); returns the cross-entropy for `target`.
    fn forward(&self, params: &[f64], x: &[f64], target: usize, scratch: &mut Vec<f64>) -> f64 {
        let (w1, b1, w2, b2) = self.split(params);
        let (d, h, k) = (self.input(), self.hidden, self.classes);
        scratch.clear();
        for j in 0..h {
            let row = &w1[j * d..(j + 1) * d];
            let pre = b1[j] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
            scratch.push(pre.tanh());
        }
        for c in 0..k {
            let row = &w2[c * h..(c + 1) * h];
            let z = b2[c] + row.iter().zip(&scratch[..h]).map(|(w, a)| w * a).sum::<f64>();
            scratch.push(z);
        }
        let logits = &mut scratch[h..];
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for z in logits.iter_mut() {
            *z = (*z - max).exp();
            total += *z;
        }
        let log_norm = total.ln();
        let loss = log_norm - logits[target].ln();
        for p in logits.iter_mut() {
            *p /= total;
        }
        loss
    }

    fn accumulate_with(&self, params: &[f64], index: usize, scale: f64, out: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
        let x = self.train.features(index);
        let target = self.train.target(index) as usize;
        let loss = self.forward(params, x, target, scratch);
        let (d, h, k) = (self.input(), self.hidden, self.classes);
        let (_, _, w2, _) = self.split(params);
        let (act, probs) = scratch.split_at(h);
        let (ow1, rest) = out.split_at_mut(h * d);
        let (ob1, rest) = rest.split_at_mut(h);
        let (ow2, ob2) = rest.split_at_mut(k * h);
        for c in 0..k {
            let dz = scale * (probs[c] - if c == target { 1.0 } else { 0.0 });
            ob2[c] += dz;
            for j in 0..h {
                ow2[c * h + j] += dz * act[j];
            }
        }
        for j in 0..h {
            let da: f64 = (0..k)
                .map(|c| w2[c * h + j] * scale * (probs[c] - if c == target { 1.0 } else { 0.0 }))
                .sum();
            let dh = da * (1.0 - act[j] * act[j]);
            ob1[j] += dh;
            for (o, xi) in ow1[j * d..(j + 1) * d].iter_mut().zip(x) {
                *o += dh * xi;
            }
        }
        loss
    }

    fn predict(&self, params: &[f64], x: &[f64], scratch: &mut Vec<f64>) -> usize {
        self.forward(params, x, 0, scratch);
        let probs = &scratch[self.hidden..];
        let mut best = 0;
        for c in 1..probs.len() {
            if probs[c] > probs[best] {
                best = c;
            }
        }
        best
    }
}

impl Problem for MlpProblem {
    fn name(&self) -> &'static str {
        "mlp"
    }

    fn dim(&self) -> usize {
        let (d, h, k) = (self.input(), self.hidden, self.classes);
        h * d + h + k * h + k
    }

    fn len(&self) -> usize {
        self.train.len()
    }

    fn loss(&self, params: &[f64], index: usize) -> f64 {
        let mut scratch = Vec::with_capacity(self.hidden + self.classes);
        self.forward(
            params,
            self.train.features(index),
            self.train.target(index) as usize,
            &mut scratch,
        )
    }

    fn accumulate_grad(&self, params: &[f64], index: usize, scale: f64, out: &mut [f64]) -> f64 {
        let mut scratch = Vec::with_capacity(self.hidden + self.classes);
        self.accumulate_with(params, index, scale, out, &mut scratch)
    }

    fn batch_grad(&self, params: &[f64], indices: &[usize], out: &mut [f64]) -> f64 {
        out.fill(0.0);
        let mut scratch = Vec::with_capacity(self.hidden + self.classes);
        let scale = 1.0 / indices.len() as f64;
        let mut loss = 0.0;
        for &i in indices {
            loss += self.accumulate_with(params, i, scale, out, &mut scratch);
        }
        loss * scale
    }

    fn full_loss(&self, params: &[f64]) -> f64 {
        let mut scratch = Vec::with_capacity(self.hidden + self.classes);
        let n = self.train.len();
        (0..n)
            .map(|i| {
                self.forward(
                    params,
                    self.train.features(i),
                    self.train.target(i) as usize,
                    &mut scratch,
                )
            })
            .sum::<f64>()
            / n as f64
    }

    fn eval_metric(&self, params: &[f64]) -> f64 {
        let mut scratch = Vec::with_capacity(self.hidden + self.classes);
        let data = &self.held_out;
        let correct = (0..data.len())
            .filter(|&i| self.predict(params, data.features(i), &mut scratch) == data.target(i) as usize)
            .count();
        correct as f64 / data.len() as f64
    }

    /// Gaussian weights with variance `1 / fan_in`, zero biases.
    fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = seed::rng(seed, seed::stream::INIT);
        let (d, h, k) = (self.input(), self.hidden, self.classes);
        let mut p = gaussian_vec(&mut rng, h * d, (1.0 / d as f64).sqrt());
        p.extend(std::iter::repeat_n(0.0, h));
        p.extend(gaussian_vec(&mut rng, k * h, (1.0 / h as f64).sqrt()));
        p.extend(std::iter::repeat_n(0.0, k));
        p
    }
}

/// Largest per-coordinate relative error between the analytic gradient of
/// example `index` and a central finite difference with step `fd_step`.
/// The denominator is `max(|analytic|, |numeric|, 1e-12)`.
pub fn gradient_check(problem: &dyn Problem, params: &[f64], index: usize, fd_step: f64) -> Result<f64> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::Domain(format!("finite-difference step {fd_step} must be > 0")));
    }
    let analytic = problem.grad(params, index);
    let mut probe = params.to_vec();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        probe[k] = params[k] + fd_step;
        let up = problem.loss(&probe, index);
        probe[k] = params[k] - fd_step;
        let down = problem.loss(&probe, index);
        probe[k] = params[k];
        for l in [up, down] {
            if !l.is_finite() {
                return Err(Error::NonFiniteLoss(l));
            }
        }
        let numeric = (up - down) / (2.0 * fd_step);
        let denom = a.abs().max(numeric.abs()).max(1e-12);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}

/// Per-epoch permutation cut into batches.
///
/// The permutation of epoch `e` depends only on `(seed, e)`, so a batch-size
/// change never perturbs the order of later epochs. The batch size is fixed
/// for an epoch when [`begin_epoch`](Self::begin_epoch) is called.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    n: usize,
    seed: u64,
    epoch: Option<usize>,
    batch_size: usize,
    order: Vec<usize>,
    cursor: usize,
}

impl BatchPlan {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            epoch: None,
            batch_size: 0,
            order: Vec::with_capacity(n),
            cursor: n,
        }
    }

    pub fn begin_epoch(&mut self, epoch: usize, batch_size: usize) -> Result<()> {
        if batch_size < 1 || batch_size > self.n {
            return Err(Error::Domain(format!("batch size {batch_size} outside [1, {}]", self.n)));
        }
        self.order.clear();
        self.order.extend(0..self.n);
        let mut rng = seed::rng(self.seed, epoch as u64);
        self.order.shuffle(&mut rng);
        self.epoch = Some(epoch);
        self.batch_size = batch_size;
        self.cursor = 0;
        Ok(())
    }

    pub fn epoch(&self) -> Option<usize> {
        self.epoch
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn permutation(&self) -> &[usize] {
        &self.order
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.n.div_ceil(self.batch_size.max(1))
    }

    /// Next batch of the current epoch, or `None` once the epoch is spent.
    pub fn next_batch(&mut self) -> Option<&[usize]> {
        if self.cursor >= self.n || self.epoch.is_none() {
            return None;
        }
        let start = self.cursor;
        let end = (start + self.batch_size).min(self.n);
        self.cursor = end;
        Some(&self.order[start..end])
    }
}
