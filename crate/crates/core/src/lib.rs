//! Schedule engine and desk-scale experiment harness for replacing
//! learning-rate decay with batch-size growth.
//!
//! The central quantity is the SGD noise scale
//! `g = lr / (1 - m) * (N / B - 1)`. Decaying the learning rate and growing
//! the batch size both shrink `g`; the second does it with far fewer
//! parameter updates. The crate is organised as:
//!
//! - [`schedule`]: piecewise-constant schedules, noise scales, conversions,
//!   scaling rules, update counts and the accumulation closed forms.
//! - [`optimizer`]: SGD, heavy-ball momentum, Nesterov and Adam on flat
//!   parameter vectors.
//! - [`problem`]: toy objectives with per-example gradients, a seeded
//!   epoch sampler and finite-difference gradient checks.
//! - [`dynamics`]: simulations showing stationary fluctuations track `g`
//!   and that the accumulation grows in as predicted.
//! - [`harness`]: config-driven training runs, schedule comparisons,
//!   learning-rate sweeps and curve emission.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod optimizer;
pub mod problem;
pub mod schedule;
pub mod seed;

pub use error::{Error, Result};
