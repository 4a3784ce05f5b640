//! Gradient-based estimation from scratch.
//!
//! * [`linalg`]: small dense row-major matrices and vectors.
//! * [`autodiff`]: forward mode with [`autodiff::Dual`], reverse mode with
//!   [`autodiff::Tape`], and a central-difference gradient checker.
//! * [`models`]: linear regression, logistic regression and a one-hidden-layer
//!   sigmoid network, each as a summed negative log-likelihood with its
//!   gradient, plus an optional L2 penalty.
//! * [`optim`]: full-batch gradient descent and wrapping mini-batch SGD.
//! * [`data`]: CSV ingestion, intercepts, the bundled iris data and a
//!   synthetic two-class generator.
//!
//! ```
//! use gradkit::data::{add_intercept, iris, Schema};
//! use gradkit::models::{linreg_grad, linreg_nll, LinearParams};
//! use gradkit::optim::{gradient_descent, TrainConfig};
//! use gradkit::Vector;
//!
//! let ds = add_intercept(&iris(&Schema::new("Petal.Length", &["Petal.Width"]))?)?;
//! let params = |theta: &Vector| LinearParams { theta: theta.clone() };
//! let trace = gradient_descent(
//!     |t| linreg_grad(&params(t), &ds.x, &ds.y),
//!     |t| linreg_nll(&params(t), &ds.x, &ds.y),
//!     &Vector::zeros(2),
//!     &TrainConfig::new(1e-4, 1000),
//! )?;
//! assert!((trace.final_theta[0] - 1.1).abs() < 0.05);
//! assert!((trace.final_theta[1] - 2.2).abs() < 0.05);
//! # Ok::<(), gradkit::Error>(())
//! ```
//!
//! The `book/` directory next to this crate explains the ideas at more
//! length; every Rust snippet in it is compiled and run as a doctest.

pub mod autodiff;
pub mod data;
mod error;
pub mod linalg;
pub mod models;
pub mod optim;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};

// Chapters of the guide, pulled in so `cargo test --doc` runs their snippets.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dual-numbers.md")]
    mod dual_numbers {}
    #[doc = include_str!("../../../book/src/reverse-mode.md")]
    mod reverse_mode {}
    #[doc = include_str!("../../../book/src/gradient-checks.md")]
    mod gradient_checks {}
    #[doc = include_str!("../../../book/src/likelihood-models.md")]
    mod likelihood_models {}
    #[doc = include_str!("../../../book/src/gradient-descent.md")]
    mod gradient_descent {}
    #[doc = include_str!("../../../book/src/minibatch-sgd.md")]
    mod minibatch_sgd {}
    #[doc = include_str!("../../../book/src/shallow-network.md")]
    mod shallow_network {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
