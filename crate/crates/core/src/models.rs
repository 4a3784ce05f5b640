//! Negative log-likelihood models.
//!
//! * Linear regression with Gaussian noise: the NLL reduces (up to constants)
//!   to the residual sum of squares `Σ (yᵢ - xᵢᵀθ)²`, with gradient
//!   `-2 Xᵀ(y - Xθ)`.
//! * Logistic regression: Bernoulli NLL (cross-entropy) with the logit link,
//!   gradient `-Xᵀ(y - p)`.
//! * A one-hidden-layer sigmoid network `σ(w₂ᵀ σ(W₁x + b₁) + b₂)` whose
//!   gradient is obtained by recording the forward pass on a [`Tape`].
//!
//! Losses are sums over samples, not means. Probabilities are clipped to
//! `[PROB_EPS, 1 - PROB_EPS]` inside the logarithms only; the analytic
//! logistic gradient uses the unclipped probabilities.
//!
//! The `record_*` functions build the same losses from tape primitives and
//! serve as the automatic-differentiation route for gradient checks.

use std::ops::Range;

use crate::autodiff::{sigmoid, NodeId, Tape};
use crate::error::{Error, Result};
use crate::linalg::{matvec, transpose_matvec, Matrix, Vector};
use crate::rng::SeededRng;

pub const PROB_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearParams {
    pub theta: Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticParams {
    pub theta: Vector,
}

/// Weights of a `input → hidden → 1` sigmoid network.
///
/// `w1` is `hidden × input`; its rows are the hidden units.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Vector,
    pub b2: f64,
}

/// L2 penalty `λ Σ θⱼ²` over every index not listed as unpenalized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Penalty {
    lambda: f64,
    unpenalized: Vec<usize>,
}

fn check_design(op: &'static str, x: &Matrix, y: &Vector, theta: &Vector) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::mismatch(op, x, format!("response of len {}", y.len())));
    }
    if x.cols() != theta.len() {
        return Err(Error::mismatch(op, x, format!("theta of len {}", theta.len())));
    }
    Ok(())
}

fn check_binary(y: &Vector) -> Result<()> {
    match y.iter().position(|&v| v != 0.0 && v != 1.0) {
        Some(row) => Err(Error::NonBinaryLabel { row, value: y[row] }),
        None => Ok(()),
    }
}

fn check_rows(x: &Matrix, rows: &Range<usize>) -> Result<()> {
    if rows.start >= rows.end || rows.end > x.rows() {
        return Err(Error::InvalidShape(format!(
            "row range {rows:?} is empty or outside 0..{}",
            x.rows()
        )));
    }
    Ok(())
}

fn row_dot(row: &[f64], theta: &[f64]) -> f64 {
    row.iter().zip(theta).map(|(a, b)| a * b).sum()
}

fn clip_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `ln σ(z)` without forming `1 - σ(z)`.
fn log_sigmoid(z: f64) -> f64 {
    -((-z.abs()).exp().ln_1p() + (-z).max(0.0))
}

/// Clipped Bernoulli negative log-likelihood from the logit. Inside the clip range the logs are
/// taken from `z` directly, which keeps full precision when `p` is near 1.
fn bernoulli_nll_logit(z: f64, y: f64) -> f64 {
    let p = sigmoid(z);
    let clipped = clip_prob(p);
    let (lp, lq) = if clipped == p {
        (log_sigmoid(z), log_sigmoid(-z))
    } else {
        (clipped.ln(), (1.0 - clipped).ln())
    };
    -(y * lp + (1.0 - y) * lq)
}

/// Residual sum of squares.
pub fn linreg_nll(p: &LinearParams, x: &Matrix, y: &Vector) -> Result<f64> {
    check_design("linreg_nll", x, y, &p.theta)?;
    let fitted = matvec(x, &p.theta)?;
    Ok(y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum())
}

/// `-2 Xᵀ (y - Xθ)`.
pub fn linreg_grad(p: &LinearParams, x: &Matrix, y: &Vector) -> Result<Vector> {
    check_design("linreg_grad", x, y, &p.theta)?;
    linreg_grad_rows(&p.theta, x, y, 0..x.rows())
}

/// Linear-regression gradient restricted to `rows`.
pub fn linreg_grad_rows(theta: &Vector, x: &Matrix, y: &Vector, rows: Range<usize>) -> Result<Vector> {
    check_design("linreg_grad_rows", x, y, theta)?;
    check_rows(x, &rows)?;
    let mut g = vec![0.0; theta.len()];
    for i in rows {
        let row = x.row(i);
        let r = -2.0 * (y[i] - row_dot(row, theta));
        for (gj, xij) in g.iter_mut().zip(row) {
            *gj += xij * r;
        }
    }
    Vector::new(g)
}

/// `σ(Xθ)` elementwise.
pub fn logistic_prob(p: &LogisticParams, x: &Matrix) -> Result<Vector> {
    if x.cols() != p.theta.len() {
        return Err(Error::mismatch(
            "logistic_prob",
            x,
            format!("theta of len {}", p.theta.len()),
        ));
    }
    let z = matvec(x, &p.theta)?;
    Vector::try_from_iter(z.iter().map(|&v| sigmoid(v)))
}

/// Cross-entropy `-Σ [y log p + (1-y) log(1-p)]` with clipped `p`.
pub fn logreg_nll(p: &LogisticParams, x: &Matrix, y: &Vector) -> Result<f64> {
    check_design("logreg_nll", x, y, &p.theta)?;
    check_binary(y)?;
    let z = matvec(x, &p.theta)?;
    Ok(z.iter().zip(y.iter()).map(|(&zi, &yi)| bernoulli_nll_logit(zi, yi)).sum())
}

/// `-Xᵀ (y - p)`.
pub fn logreg_grad(p: &LogisticParams, x: &Matrix, y: &Vector) -> Result<Vector> {
    check_design("logreg_grad", x, y, &p.theta)?;
    let probs = logistic_prob(p, x)?;
    let residual = Vector::try_from_iter(y.iter().zip(probs.iter()).map(|(a, b)| b - a))?;
    transpose_matvec(x, &residual)
}

/// Logistic-regression gradient restricted to `rows`.
pub fn logreg_grad_rows(theta: &Vector, x: &Matrix, y: &Vector, rows: Range<usize>) -> Result<Vector> {
    check_design("logreg_grad_rows", x, y, theta)?;
    check_rows(x, &rows)?;
    let mut g = vec![0.0; theta.len()];
    for i in rows {
        let row = x.row(i);
        let r = sigmoid(row_dot(row, theta)) - y[i];
        for (gj, xij) in g.iter_mut().zip(row) {
            *gj += xij * r;
        }
    }
    Vector::new(g)
}

/// Records the residual sum of squares on `tape`, with `theta` as nodes.
pub fn record_linreg_nll(tape: &mut Tape, theta: &[NodeId], x: &Matrix, y: &Vector) -> Result<NodeId> {
    if x.cols() != theta.len() || x.rows() != y.len() {
        return Err(Error::mismatch("record_linreg_nll", x, format!("theta {} / y {}", theta.len(), y.len())));
    }
    let mut terms = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = tape.leaves(x.row(i));
        let fitted = tape.dot(&row, theta)?;
        let target = tape.leaf(y[i]);
        let r = tape.sub(target, fitted)?;
        terms.push(tape.mul(r, r)?);
    }
    tape.sum(&terms)
}

/// `log(clip(p))` where `p` is a node; saturated values become constants.
fn record_clipped_log(tape: &mut Tape, p: NodeId) -> Result<NodeId> {
    let v = tape.value(p)?;
    if (PROB_EPS..=1.0 - PROB_EPS).contains(&v) {
        tape.log(p)
    } else {
        Ok(tape.leaf(clip_prob(v).ln()))
    }
}

/// Records the Bernoulli log-likelihood of one probability node.
fn record_bernoulli_nll(tape: &mut Tape, p: NodeId, y: f64) -> Result<NodeId> {
    let one = tape.leaf(1.0);
    let q = tape.sub(one, p)?;
    let lp = record_clipped_log(tape, p)?;
    let lq = record_clipped_log(tape, q)?;
    let yl = tape.leaf(y);
    let yc = tape.leaf(1.0 - y);
    let a = tape.mul(yl, lp)?;
    let b = tape.mul(yc, lq)?;
    let s = tape.add(a, b)?;
    tape.neg(s)
}

/// Records the clipped cross-entropy of logistic regression on `tape`.
pub fn record_logreg_nll(tape: &mut Tape, theta: &[NodeId], x: &Matrix, y: &Vector) -> Result<NodeId> {
    if x.cols() != theta.len() || x.rows() != y.len() {
        return Err(Error::mismatch("record_logreg_nll", x, format!("theta {} / y {}", theta.len(), y.len())));
    }
    check_binary(y)?;
    let mut terms = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = tape.leaves(x.row(i));
        let z = tape.dot(&row, theta)?;
        let p = tape.sigmoid(z)?;
        terms.push(record_bernoulli_nll(tape, p, y[i])?);
    }
    tape.sum(&terms)
}

impl MlpParams {
    pub fn new(w1: Matrix, b1: Vector, w2: Vector, b2: f64) -> Result<Self> {
        if w1.rows() != b1.len() || w1.rows() != w2.len() {
            return Err(Error::InvalidShape(format!(
                "W1 is {w1} but b1 has {} and w2 has {} entries",
                b1.len(),
                w2.len()
            )));
        }
        Ok(MlpParams { w1, b1, w2, b2 })
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        MlpParams {
            w1: Matrix::zeros(hidden, input),
            b1: Vector::zeros(hidden),
            w2: Vector::zeros(hidden),
            b2: 0.0,
        }
    }

    /// Weights drawn as `0.1·N(0,1)` and biases as `0.01·N(0,1)`, in the
    /// order W1 (row-major), b1, w2, b2.
    pub fn random_init(input: usize, hidden: usize, rng: &mut SeededRng) -> Self {
        let mut draw = |n: usize, s: f64| (0..n).map(|_| s * rng.normal()).collect::<Vec<_>>();
        let w1 = Matrix::new(hidden, input, draw(hidden * input, 0.1)).expect("shape");
        let b1 = Vector::new(draw(hidden, 0.01)).expect("hidden >= 1");
        let w2 = Vector::new(draw(hidden, 0.1)).expect("hidden >= 1");
        let b2 = draw(1, 0.01)[0];
        MlpParams { w1, b1, w2, b2 }
    }

    pub fn input(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows()
    }

    /// Number of scalar parameters, `hidden·(input + 2) + 1`.
    pub fn len(&self) -> usize {
        self.hidden() * (self.input() + 2) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flattens to `[W1 row-major, b1, w2, b2]`.
    pub fn flatten(&self) -> Vector {
        let mut v = self.w1.as_slice().to_vec();
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        Vector::new(v).expect("non-empty")
    }

    pub fn from_flat(input: usize, hidden: usize, flat: &[f64]) -> Result<Self> {
        let w = hidden * input;
        if input == 0 || hidden == 0 || flat.len() != w + 2 * hidden + 1 {
            return Err(Error::InvalidShape(format!(
                "{} values cannot fill a {input}->{hidden}->1 network",
                flat.len()
            )));
        }
        MlpParams::new(
            Matrix::new(hidden, input, flat[..w].to_vec())?,
            Vector::new(flat[w..w + hidden].to_vec())?,
            Vector::new(flat[w + hidden..w + 2 * hidden].to_vec())?,
            flat[w + 2 * hidden],
        )
    }
}

/// The fixed 2→4→1 network whose hidden units are the four lines
/// `±x₁ ± x₂ + 6`; it separates the square `|x₁| + |x₂| < 6` from its
/// outside.
pub fn demo_network() -> MlpParams {
    MlpParams {
        w1: Matrix::from_rows(&[[1.0, 1.0], [-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0]]).expect("4x2"),
        b1: Vector::from([6.0; 4]),
        w2: Vector::from([1.0; 4]),
        b2: -3.1,
    }
}

fn forward_logit(p: &MlpParams, x: &[f64]) -> f64 {
    let out: f64 = (0..p.hidden())
        .map(|j| p.w2[j] * sigmoid(row_dot(p.w1.row(j), x) + p.b1[j]))
        .sum();
    out + p.b2
}

fn forward_row(p: &MlpParams, x: &[f64]) -> f64 {
    sigmoid(forward_logit(p, x))
}

/// Probability of the positive class for one input.
pub fn mlp_forward(p: &MlpParams, x: &Vector) -> Result<f64> {
    if x.len() != p.input() {
        return Err(Error::mismatch("mlp_forward", &p.w1, format!("input of len {}", x.len())));
    }
    Ok(forward_row(p, x))
}

fn check_mlp_data(op: &'static str, p: &MlpParams, x: &Matrix, y: &Vector) -> Result<()> {
    if x.cols() != p.input() || x.rows() != y.len() {
        return Err(Error::mismatch(op, x, format!("network input {} / y {}", p.input(), y.len())));
    }
    check_binary(y)
}

/// Summed cross-entropy of the network over the rows of `x`.
pub fn mlp_nll(p: &MlpParams, x: &Matrix, y: &Vector) -> Result<f64> {
    check_mlp_data("mlp_nll", p, x, y)?;
    Ok((0..x.rows()).map(|i| bernoulli_nll_logit(forward_logit(p, x.row(i)), y[i])).sum())
}

/// Parameter nodes of a network recorded on a tape.
#[derive(Clone, Debug)]
pub struct MlpNodes {
    pub w1: Vec<NodeId>,
    pub b1: Vec<NodeId>,
    pub w2: Vec<NodeId>,
    pub b2: NodeId,
    input: usize,
}

impl MlpNodes {
    /// Splits leaves laid out as [`MlpParams::flatten`].
    pub fn from_flat(input: usize, hidden: usize, leaves: &[NodeId]) -> Result<Self> {
        let w = input * hidden;
        if leaves.len() != w + 2 * hidden + 1 {
            return Err(Error::InvalidShape(format!(
                "{} nodes cannot fill a {input}->{hidden}->1 network",
                leaves.len()
            )));
        }
        Ok(MlpNodes {
            w1: leaves[..w].to_vec(),
            b1: leaves[w..w + hidden].to_vec(),
            w2: leaves[w + hidden..w + 2 * hidden].to_vec(),
            b2: leaves[w + 2 * hidden],
            input,
        })
    }

    fn hidden(&self) -> usize {
        self.b1.len()
    }
}

/// Records the network's output probability for one input row.
pub fn record_mlp_forward(tape: &mut Tape, p: &MlpNodes, x: &[f64]) -> Result<NodeId> {
    if x.len() != p.input {
        return Err(Error::mismatch("record_mlp_forward", format!("input {}", p.input), format!("row of len {}", x.len())));
    }
    let xs = tape.leaves(x);
    let mut activations = Vec::with_capacity(p.hidden());
    for j in 0..p.hidden() {
        let pre = tape.dot(&p.w1[j * p.input..(j + 1) * p.input], &xs)?;
        let pre = tape.add(pre, p.b1[j])?;
        activations.push(tape.sigmoid(pre)?);
    }
    let out = tape.dot(&p.w2, &activations)?;
    let out = tape.add(out, p.b2)?;
    tape.sigmoid(out)
}

/// Records the summed cross-entropy of the network over the rows of `x`.
pub fn record_mlp_nll(tape: &mut Tape, p: &MlpNodes, x: &Matrix, y: &Vector) -> Result<NodeId> {
    if x.rows() != y.len() {
        return Err(Error::mismatch("record_mlp_nll", x, format!("y of len {}", y.len())));
    }
    check_binary(y)?;
    let mut terms = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let prob = record_mlp_forward(tape, p, x.row(i))?;
        terms.push(record_bernoulli_nll(tape, prob, y[i])?);
    }
    tape.sum(&terms)
}

/// Back-propagated gradient of [`mlp_nll`], shaped like the parameters.
pub fn mlp_grad(p: &MlpParams, x: &Matrix, y: &Vector) -> Result<MlpParams> {
    check_mlp_data("mlp_grad", p, x, y)?;
    let mut tape = Tape::new();
    let leaves = tape.leaves(&p.flatten());
    let nodes = MlpNodes::from_flat(p.input(), p.hidden(), &leaves)?;
    let out = record_mlp_nll(&mut tape, &nodes, x, y)?;
    let adjoints = tape.backward(out)?;
    MlpParams::from_flat(p.input(), p.hidden(), &adjoints.collect(&leaves)?)
}

/// Fraction of rows where `prob > 0.5` agrees with the label.
pub fn mlp_accuracy(p: &MlpParams, x: &Matrix, y: &Vector) -> Result<f64> {
    check_mlp_data("mlp_accuracy", p, x, y)?;
    let hits = (0..x.rows())
        .filter(|&i| (forward_row(p, x.row(i)) > 0.5) == (y[i] == 1.0))
        .count();
    Ok(hits as f64 / x.rows() as f64)
}

impl Penalty {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::NegativePenalty(lambda));
        }
        Ok(Penalty {
            lambda,
            unpenalized: Vec::new(),
        })
    }

    pub fn none() -> Self {
        Penalty::default()
    }

    /// Leaves index `i` (typically the intercept) out of the penalty.
    pub fn excluding(mut self, i: usize) -> Self {
        if !self.unpenalized.contains(&i) {
            self.unpenalized.push(i);
        }
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn unpenalized(&self) -> &[usize] {
        &self.unpenalized
    }

    pub fn is_active(&self) -> bool {
        self.lambda > 0.0
    }
}

/// `(λ Σ θⱼ², 2λθ)` over penalized indices.
pub fn l2_penalty(theta: &Vector, pen: &Penalty) -> Result<(f64, Vector)> {
    if pen.lambda < 0.0 {
        return Err(Error::NegativePenalty(pen.lambda));
    }
    if let Some(&i) = pen.unpenalized.iter().find(|&&i| i >= theta.len()) {
        return Err(Error::InvalidShape(format!(
            "unpenalized index {i} outside theta of len {}",
            theta.len()
        )));
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; theta.len()];
    if pen.lambda > 0.0 {
        for (j, (&t, g)) in theta.iter().zip(grad.iter_mut()).enumerate() {
            if pen.unpenalized.contains(&j) {
                continue;
            }
            value += pen.lambda * t * t;
            *g = 2.0 * pen.lambda * t;
        }
    }
    Ok((value, Vector::new(grad)?))
}
