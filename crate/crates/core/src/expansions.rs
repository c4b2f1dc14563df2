//! Second-order correction terms for powered Gaussian maxima and the
//! limits they produce under each dependence regime.
//!
//! Closed forms are evaluated exactly as stated. The quadrature-backed
//! variants (`i_k`, `kappa1_from_integrals`, `kappa2_from_integral`) are the
//! reference values the closed forms are checked against.

use crate::error::{Error, Result};
use crate::hr::hr_cdf_at;
use crate::norming::{DependenceRegime, Lambda, NormingConstants, NormingScheme, SchemeKind};
use crate::quadrature::{quad_semi_infinite, QuadResult, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
use crate::special::{std_normal_cdf, std_normal_pdf, std_normal_sf};

/// Standard-scheme univariate correction `(1 + x + (2−t)x²/2) e^{−x}`.
pub fn mu(t: f64, x: f64) -> f64 {
    (1.0 + x + 0.5 * (2.0 - t) * x * x) * (-x).exp()
}

/// Starred-scheme univariate correction `−(7/2 + 3x + x²) e^{−x}`.
pub fn nu(x: f64) -> f64 {
    -(3.5 + 3.0 * x + x * x) * (-x).exp()
}

#[inline]
fn shifts(lambda: f64, x: f64, y: f64) -> (f64, f64) {
    let s = (y - x) / (2.0 * lambda);
    // (λ + (y−x)/2λ, λ + (x−y)/2λ)
    (lambda + s, lambda - s)
}

/// Dependence part shared by the finite-λ corrections.
pub fn chi(alpha: f64, lambda: f64, x: f64, y: f64) -> f64 {
    let (u, _) = shifts(lambda, x, y);
    (2.0 * alpha - (x + y + 2.0) * lambda - lambda.powi(3)) * (-x).exp() * std_normal_pdf(u)
}

/// Finite-λ correction under the standard scheme.
pub fn tau(alpha: f64, lambda: f64, x: f64, y: f64, t: f64) -> f64 {
    let (u, v) = shifts(lambda, x, y);
    mu(t, x) * std_normal_cdf(u) + mu(t, y) * std_normal_cdf(v) + chi(alpha, lambda, x, y)
}

pub fn kappa1(alpha: f64, lambda: f64, x: f64, y: f64, t: f64) -> f64 {
    let (u, _) = shifts(lambda, x, y);
    let ex = (-x).exp();
    let l2 = lambda * lambda;
    let first = 2.0 * ((2.0 - t) * l2 * l2 - (2.0 - t) * l2 * x + (1.0 - t) * l2) * std_normal_sf(u) * ex;
    let second = (2.0 * alpha - (5.0 - 2.0 * t) * l2 * lambda + (1.0 - t) * lambda * x + (1.0 - t) * lambda * y)
        * std_normal_pdf(u)
        * ex;
    first + second
}

pub fn kappa2(_alpha: f64, lambda: f64, x: f64, y: f64, t: f64) -> f64 {
    let (u, v) = shifts(lambda, x, y);
    let (ex, ey) = ((-x).exp(), (-y).exp());
    let l2 = lambda * lambda;
    let a = -(0.5 * (2.0 - t) * y * y + y + 1.0) * std_normal_cdf(v) * ey;
    let b = (2.0 * (2.0 - t) * l2 * l2 - 2.0 * (2.0 - t) * l2 * x + 2.0 * (1.0 - t) * l2 + 0.5 * (2.0 - t) * x * x + x + 1.0)
        * std_normal_sf(u)
        * ex;
    let c = (2.0 * (2.0 - t) * l2 * lambda - (2.0 - t) * lambda * (x + y) - 2.0 * lambda) * std_normal_pdf(u) * ex;
    a + b - c
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda must be positive and finite, got {lambda}")))
    }
}

/// `∫_y^∞ φ(λ + (x−z)/(2λ)) e^{−z} z^k dz` by adaptive quadrature.
pub fn i_k(lambda: f64, x: f64, y: f64, k: u32) -> Result<QuadResult> {
    check_lambda(lambda)?;
    if k > 2 {
        return Err(Error::domain(format!("k must be 0, 1 or 2, got {k}")));
    }
    let two_l = 2.0 * lambda;
    quad_semi_infinite(
        |z| std_normal_pdf(lambda + (x - z) / two_l) * (-z).exp() * z.powi(k as i32),
        y,
        DEFAULT_REL_TOL,
        DEFAULT_ABS_TOL,
    )
    .require_converged()
}

/// Gaussian-shift reduction of `I_0`: `2λ e^{−x} Φ((x−y)/(2λ) − λ)`.
pub fn i0_closed(lambda: f64, x: f64, y: f64) -> f64 {
    2.0 * lambda * (-x).exp() * std_normal_cdf((x - y) / (2.0 * lambda) - lambda)
}

/// `κ₁` assembled from quadrature values of `I_0`, `I_1`, `I_2`.
pub fn kappa1_from_integrals(alpha: f64, lambda: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    let i0 = i_k(lambda, x, y, 0)?.value;
    let i1 = i_k(lambda, x, y, 1)?.value;
    let i2 = i_k(lambda, x, y, 2)?.value;
    let l2 = lambda * lambda;
    let quad = (1.0 - t) / (4.0 * lambda);
    let c0 = alpha - 0.5 * l2 * lambda - 0.5 * alpha / l2 * x - 0.25 * lambda * x - quad * x * x;
    let c1 = 0.75 * lambda - 0.5 * alpha / l2;
    Ok(c0 * i0 - c1 * i1 + quad * i2)
}

/// `κ₂` from its defining integral
/// `∫_y^∞ Φ(λ + (x−z)/(2λ)) e^{−z} ((1−t)z − (2−t)z²/2) dz`.
pub fn kappa2_from_integral(lambda: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let two_l = 2.0 * lambda;
    let r = quad_semi_infinite(
        |z| std_normal_cdf(lambda + (x - z) / two_l) * (-z).exp() * ((1.0 - t) * z - 0.5 * (2.0 - t) * z * z),
        y,
        DEFAULT_REL_TOL,
        DEFAULT_ABS_TOL,
    )
    .require_converged()?;
    Ok(r.value)
}

/// All closed-form correction terms at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTermSet {
    pub alpha: f64,
    pub lambda: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub tau: f64,
    pub chi: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl ExpansionTermSet {
    pub fn new(alpha: f64, lambda: f64, x: f64, y: f64, t: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("t must be positive, got {t}")));
        }
        if ![alpha, x, y].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("alpha, x and y must be finite"));
        }
        Ok(ExpansionTermSet {
            alpha,
            lambda,
            x,
            y,
            t,
            mu_x: mu(t, x),
            mu_y: mu(t, y),
            tau: tau(alpha, lambda, x, y, t),
            chi: chi(alpha, lambda, x, y),
            kappa1: kappa1(alpha, lambda, x, y, t),
            kappa2: kappa2(alpha, lambda, x, y, t),
        })
    }
}

/// Two-term approximation of `n Φ̄(ω(x))`.
pub fn univariate_second_order(nc: &NormingConstants, x: f64) -> f64 {
    let b2 = nc.b_n * nc.b_n;
    match nc.scheme.kind() {
        SchemeKind::Standard => (-x).exp() - mu(nc.scheme.t(), x) / b2,
        SchemeKind::Starred => (-x).exp() - nu(x) / (b2 * b2),
    }
}

/// Which limit result applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitCase {
    FiniteStandard,
    FiniteStarred,
    IndependentStandard,
    CompleteStandard,
    IndependentStarred,
    CompleteStarred,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremLimit {
    /// Power `p` of the `log n` scaling.
    pub scale_exponent: u32,
    pub limit_value: f64,
    pub case: LimitCase,
}

/// Limit of `(log n)^p Δ` for a regime and norming scheme.
pub fn theorem_limit(regime: DependenceRegime, scheme: NormingScheme, x: f64, y: f64) -> Result<TheoremLimit> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::domain("x and y must be finite"));
    }
    let t = scheme.t();
    let h = hr_cdf_at(regime.lambda, x, y);
    let (scale_exponent, limit_value, case) = match (regime.lambda, scheme.kind()) {
        (Lambda::Finite(l), SchemeKind::Standard) => (1, 0.5 * tau(regime.alpha, l, x, y, t) * h, LimitCase::FiniteStandard),
        (Lambda::Finite(l), SchemeKind::Starred) => (1, 0.5 * chi(regime.alpha, l, x, y) * h, LimitCase::FiniteStarred),
        (Lambda::Infinite, SchemeKind::Standard) => (
            1,
            0.5 * (mu(t, x) + mu(t, y)) * h,
            LimitCase::IndependentStandard,
        ),
        (Lambda::Zero, SchemeKind::Standard) => (1, 0.5 * mu(t, x.min(y)) * h, LimitCase::CompleteStandard),
        (Lambda::Infinite, SchemeKind::Starred) => (2, 0.25 * (nu(x) + nu(y)) * h, LimitCase::IndependentStarred),
        (Lambda::Zero, SchemeKind::Starred) => (2, 0.25 * nu(x.min(y)) * h, LimitCase::CompleteStarred),
    };
    Ok(TheoremLimit {
        scale_exponent,
        limit_value,
        case,
    })
}
