//! Full-batch gradient descent and mini-batch SGD with a constant step.
//!
//! Mini-batches are consecutive row slices that wrap around the (pre-shuffled)
//! data: iteration `i` (1-based) with batch size `bs` over `n` rows uses
//! `s = ((i-1)·bs) mod n`, `e = min(s + bs, n)`, i.e. rows `s..e`. When `bs`
//! does not divide `n` the last slice of a pass is short and the next one
//! starts wherever the modulo lands.
//!
//! Batch gradients are summed over the batch by default ([`Normalize::Sum`]);
//! [`Normalize::Mean`] divides by the batch length instead.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{add, axpy, scale, Vector};
use crate::models::{l2_penalty, Penalty};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalize {
    #[default]
    Sum,
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub iters: usize,
    /// Rows per step; 0 means the full data set.
    pub batch_size: usize,
    pub seed: u64,
    pub normalize: Normalize,
    pub l2: Penalty,
    pub trace_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            iters: 1000,
            batch_size: 0,
            seed: 0,
            normalize: Normalize::Sum,
            l2: Penalty::none(),
            trace_every: 1000,
        }
    }
}

impl TrainConfig {
    pub fn new(lr: f64, iters: usize) -> Self {
        TrainConfig {
            lr,
            iters,
            ..TrainConfig::default()
        }
    }

    pub fn with_batch_size(mut self, bs: usize) -> Self {
        self.batch_size = bs;
        self
    }

    pub fn with_trace_every(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    pub fn with_normalize(mut self, normalize: Normalize) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_l2(mut self, l2: Penalty) -> Self {
        self.l2 = l2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::InvalidConfig(format!("learning rate must be > 0, got {}", self.lr)));
        }
        if self.iters == 0 {
            return Err(Error::InvalidConfig("iters must be >= 1".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidConfig("trace_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Effective batch size for `n` rows.
    pub fn resolve_batch(&self, n: usize) -> Result<usize> {
        match self.batch_size {
            0 => Ok(n),
            bs if bs > n => Err(Error::InvalidConfig(format!("batch size {bs} exceeds {n} samples"))),
            bs => Ok(bs),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub iter: usize,
    pub theta: Vector,
    /// Full-data loss, including the penalty.
    pub loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    pub iterations: Vec<TracePoint>,
    pub final_theta: Vector,
}

impl TrainTrace {
    pub fn final_loss(&self) -> f64 {
        self.iterations.last().map_or(f64::NAN, |p| p.loss)
    }

    /// `(iter, θⱼ)` pairs.
    pub fn coordinate(&self, j: usize) -> Vec<(usize, f64)> {
        self.iterations.iter().map(|p| (p.iter, p.theta[j])).collect()
    }

    /// First recorded iteration at which `θⱼ >= threshold`.
    pub fn first_reaching(&self, j: usize, threshold: f64) -> Option<usize> {
        self.iterations.iter().find(|p| p.theta[j] >= threshold).map(|p| p.iter)
    }
}

/// Gradient rows touched after `iter` steps of batch size `bs`.
pub fn rows_evaluated(iter: usize, bs: usize) -> usize {
    iter * bs
}

/// Half-open row range for 1-based iteration `i`.
pub fn minibatch_bounds(i: usize, bs: usize, n: usize) -> Result<Range<usize>> {
    if i == 0 {
        return Err(Error::InvalidConfig("iterations are 1-based".into()));
    }
    if bs == 0 || bs > n {
        return Err(Error::InvalidConfig(format!("batch size {bs} must be in 1..={n}")));
    }
    // (i-1)·bs can overflow for huge i; reduce each factor first
    let start = (((i - 1) % n) * (bs % n)) % n;
    Ok(start..(start + bs).min(n))
}

/// Seeded permutation of `0..n`.
pub fn shuffle_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut idx);
    idx
}

fn run<S, L>(mut step_grad: S, loss_fn: L, theta0: &Vector, cfg: &TrainConfig) -> Result<TrainTrace>
where
    S: FnMut(usize, &Vector) -> Result<Vector>,
    L: Fn(&Vector) -> Result<f64>,
{
    cfg.validate()?;
    let total_loss = |theta: &Vector, iter: usize| -> Result<f64> {
        let loss = loss_fn(theta)? + l2_penalty(theta, &cfg.l2)?.0;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration: iter, what: "loss" });
        }
        Ok(loss)
    };

    let mut theta = theta0.clone();
    let mut iterations = vec![TracePoint {
        iter: 0,
        loss: total_loss(&theta, 0)?,
        theta: theta.clone(),
    }];
    for i in 1..=cfg.iters {
        let mut g = step_grad(i, &theta)?;
        if g.len() != theta.len() {
            return Err(Error::mismatch("gradient step", format!("theta len {}", theta.len()), format!("gradient len {}", g.len())));
        }
        if cfg.l2.is_active() {
            g = add(&g, &l2_penalty(&theta, &cfg.l2)?.1)?;
        }
        if !g.is_finite() {
            return Err(Error::Divergence { iteration: i, what: "gradient" });
        }
        theta = axpy(-cfg.lr, &g, &theta)?;
        if !theta.is_finite() {
            return Err(Error::Divergence { iteration: i, what: "parameters" });
        }
        if i % cfg.trace_every == 0 || i == cfg.iters {
            iterations.push(TracePoint {
                iter: i,
                loss: total_loss(&theta, i)?,
                theta: theta.clone(),
            });
        }
    }
    Ok(TrainTrace {
        iterations,
        final_theta: theta,
    })
}

/// `θ ← θ - α (∇l(θ) + ∇φ(θ))`, `cfg.iters` times.
///
/// `cfg.batch_size` and `cfg.normalize` are ignored; `grad_fn` is the full
/// gradient.
pub fn gradient_descent<G, L>(grad_fn: G, loss_fn: L, theta0: &Vector, cfg: &TrainConfig) -> Result<TrainTrace>
where
    G: Fn(&Vector) -> Result<Vector>,
    L: Fn(&Vector) -> Result<f64>,
{
    run(|_, theta| grad_fn(theta), loss_fn, theta0, cfg)
}

/// Mini-batch SGD over `n` rows using the wrapping slice scheme.
///
/// `batch_grad(θ, rows)` returns the gradient summed over `rows`. The data
/// are expected to be shuffled already.
pub fn sgd<G, L>(batch_grad: G, loss_fn: L, n: usize, theta0: &Vector, cfg: &TrainConfig) -> Result<TrainTrace>
where
    G: Fn(&Vector, Range<usize>) -> Result<Vector>,
    L: Fn(&Vector) -> Result<f64>,
{
    let bs = cfg.resolve_batch(n)?;
    let step = |i: usize, theta: &Vector| {
        let rows = minibatch_bounds(i, bs, n)?;
        let len = rows.len();
        let g = batch_grad(theta, rows)?;
        Ok(match cfg.normalize {
            Normalize::Sum => g,
            Normalize::Mean => scale(1.0 / len as f64, &g),
        })
    };
    run(step, loss_fn, theta0, cfg)
}
