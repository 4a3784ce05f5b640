//! Automatic differentiation over a closed set of scalar operators:
//! add, sub, mul, div, neg, exp, log and sigmoid.
//!
//! [`Dual`] carries one tangent forward through a computation; [`Tape`]
//! records the computation and sweeps adjoints backward so a single pass
//! yields the gradient with respect to every input. The [`check`] module
//! compares either against central finite differences.

pub mod check;
mod dual;
mod tape;

pub use check::{central_differences, finite_diff_check, max_relative_error};
pub use dual::Dual;
pub use tape::{grad, Adjoints, Node, NodeId, Op, Tape};

/// Logistic function, evaluated so that neither branch exponentiates a
/// positive argument.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
