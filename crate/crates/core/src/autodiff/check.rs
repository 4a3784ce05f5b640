//! Central finite differences as an independent gradient oracle.
//!
//! The two-sided quotient `(f(x+h) - f(x-h)) / 2h` has O(h²) truncation error,
//! which is why it is used here instead of the one-sided form.

use crate::autodiff::tape::{grad, NodeId, Tape};
use crate::error::Result;
use crate::linalg::Vector;

/// Per-coordinate central-difference gradient of `f` at `point`.
pub fn central_differences<F>(f: F, point: &Vector, h: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let mut shifted = point.to_vec();
    let mut out = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let x = point[i];
        shifted[i] = x + h;
        let up = f(&Vector::new(shifted.clone())?)?;
        shifted[i] = x - h;
        let down = f(&Vector::new(shifted.clone())?)?;
        shifted[i] = x;
        out.push((up - down) / (2.0 * h));
    }
    Vector::new(out)
}

/// `max_i |a_i - n_i| / max(|a_i|, 1e-8)`.
///
/// # Panics
/// If the lengths differ.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient lengths differ");
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(1e-8))
        .fold(0.0, f64::max)
}

/// Compares the reverse-mode gradient of a tape-recorded function against
/// central differences of the same function and returns the max relative
/// error.
pub fn finite_diff_check<F>(f: F, point: &Vector, h: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    let (_, analytic) = grad(&f, point)?;
    let value = |p: &Vector| grad(&f, p).map(|(v, _)| v);
    let numeric = central_differences(value, point, h)?;
    Ok(max_relative_error(&analytic, &numeric))
}
