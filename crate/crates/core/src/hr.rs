//! Gumbel and Hüsler-Reiss max-stable laws.

use crate::error::{Error, Result};
use crate::norming::Lambda;
use crate::special::std_normal_cdf;

/// Finite λ below this is evaluated with the complete-dependence formula.
pub const LAMBDA_ZERO_CUTOFF: f64 = 1e-8;
/// Finite λ above this is evaluated with the independence formula.
pub const LAMBDA_INFINITE_CUTOFF: f64 = 1e8;

/// `Λ(x) = exp(−e^{−x})`.
pub fn gumbel(x: f64) -> f64 {
    gumbel_log(x).exp()
}

/// `ln Λ(x) = −e^{−x}`.
pub fn gumbel_log(x: f64) -> f64 {
    -(-x).exp()
}

/// Argument of the bivariate law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrPoint {
    pub x: f64,
    pub y: f64,
    pub lambda: Lambda,
}

impl HrPoint {
    pub fn new(lambda: Lambda, x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::domain(format!("arguments must be finite, got ({x}, {y})")));
        }
        if let Lambda::Finite(v) = lambda {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("finite lambda must be positive, got {v}")));
            }
        }
        Ok(HrPoint { x, y, lambda })
    }
}

/// Collapses extreme finite λ onto the limiting cases.
fn effective(lambda: Lambda) -> Lambda {
    match lambda {
        Lambda::Finite(v) if v < LAMBDA_ZERO_CUTOFF => Lambda::Zero,
        Lambda::Finite(v) if v > LAMBDA_INFINITE_CUTOFF => Lambda::Infinite,
        other => other,
    }
}

/// `E = −ln H_λ(x, y)`.
pub fn hr_exponent(p: &HrPoint) -> f64 {
    let (x, y) = (p.x, p.y);
    match effective(p.lambda) {
        Lambda::Zero => (-x.min(y)).exp(),
        Lambda::Infinite => (-x).exp() + (-y).exp(),
        Lambda::Finite(l) => {
            let s = (x - y) / (2.0 * l);
            std_normal_cdf(l + s) * (-y).exp() + std_normal_cdf(l - s) * (-x).exp()
        }
    }
}

/// `H_λ(x, y)`.
pub fn hr_cdf(p: &HrPoint) -> f64 {
    (-hr_exponent(p)).exp()
}

/// Shorthand for unchecked finite arguments.
pub fn hr_cdf_at(lambda: Lambda, x: f64, y: f64) -> f64 {
    hr_cdf(&HrPoint { x, y, lambda })
}

pub fn hr_exponent_at(lambda: Lambda, x: f64, y: f64) -> f64 {
    hr_exponent(&HrPoint { x, y, lambda })
}
