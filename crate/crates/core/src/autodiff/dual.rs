//! Forward-mode differentiation with dual numbers.
//!
//! A [`Dual`] pairs a primal value with its tangent: the derivative of that
//! value with respect to whichever single input was seeded with tangent 1.
//! Each operator computes its primal result and pushes the tangent through
//! the local derivative, so one forward pass yields one directional
//! derivative.
//!
//! ```
//! use gradkit::autodiff::Dual;
//!
//! // d/dx sigmoid(w x + b) at x = 2, w = 3, b = 5
//! let x = Dual::variable(2.0);
//! let y = (Dual::constant(3.0) * x + Dual::constant(5.0)).sigmoid();
//! assert!((y.value - 0.9999833).abs() < 1e-7);
//! assert!((y.deriv - 5.0103e-5).abs() < 1e-8);
//! ```

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::autodiff::sigmoid;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Self {
        Dual { value, deriv }
    }

    /// The seeded input: tangent 1.
    pub fn variable(value: f64) -> Self {
        Dual { value, deriv: 1.0 }
    }

    pub fn constant(value: f64) -> Self {
        Dual { value, deriv: 0.0 }
    }

    pub fn exp(self) -> Dual {
        let e = self.value.exp();
        Dual::new(e, self.deriv * e)
    }

    /// Natural logarithm; `value` must be positive.
    pub fn ln(self) -> Result<Dual> {
        if self.value <= 0.0 || self.value.is_nan() {
            return Err(Error::Domain {
                op: "log",
                value: self.value,
            });
        }
        Ok(Dual::new(self.value.ln(), self.deriv / self.value))
    }

    pub fn sigmoid(self) -> Dual {
        let s = sigmoid(self.value);
        Dual::new(s, self.deriv * s * (1.0 - s))
    }

    /// Division that reports a zero denominator instead of producing inf.
    pub fn checked_div(self, rhs: Dual) -> Result<Dual> {
        if rhs.value == 0.0 {
            return Err(Error::Domain {
                op: "div",
                value: rhs.value,
            });
        }
        Ok(self / rhs)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

/// Unchecked: a zero denominator yields non-finite parts. Use
/// [`Dual::checked_div`] when the denominator may vanish.
impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let q = self.value / rhs.value;
        Dual::new(q, (self.deriv - q * rhs.deriv) / rhs.value)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}
