//! Exact law of the powered componentwise maxima of `n` i.i.d. bivariate
//! standard normal pairs, and its distance to the max-stable limit.
//!
//! `P(|M₁| ≤ a, |M₂| ≤ b)` is assembled from four joint distribution values
//! `F^n(±a, ±b)`. Each `F` is written in survival form so no term is a
//! difference of numbers close to one, and the `n`-th power is taken as
//! `exp(n · ln(1 − s))`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansions::{theorem_limit, TheoremLimit};
use crate::hr::hr_cdf_at;
use crate::norming::{
    make_norming_with, rho_at_bn, BnConvention, DependenceRegime, Lambda, NormingConstants, NormingScheme,
    RhoSequence, SampleSize, SchemeKind,
};
use crate::special::{bvn_upper_detailed, std_normal_sf, std_normal_sf_log, BvnTailQuery};

const EPS: f64 = f64::EPSILON;

/// Exact joint probability of the powered maxima at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteLawPoint {
    pub n: SampleSize,
    pub rho: f64,
    pub t: f64,
    pub scheme: NormingScheme,
    pub x: f64,
    pub y: f64,
    /// `P(|M₁|^t ≤ c x + d, |M₂|^t ≤ c y + d)`.
    pub prob: f64,
    pub log_prob: f64,
    /// `P(M₁ ≤ ω(x), M₂ ≤ ω(y))`, the upper-rectangle part alone.
    pub upper_prob: f64,
    /// Absolute error bound on `prob`.
    pub accuracy_estimate: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("correlation must lie in [-1, 1], got {rho}")))
    }
}

/// `n · P(X > ω(x), Y > ω(y))`.
pub fn per_obs_joint_survival(nc: &NormingConstants, rho: f64, x: f64, y: f64) -> Result<f64> {
    check_rho(rho)?;
    let (a, b) = (nc.omega(x)?, nc.omega(y)?);
    let u = bvn_upper_detailed(BvnTailQuery::new(a, b, rho)?);
    Ok((nc.n.ln() + u.log_value).exp())
}

/// `(F(a, b))^n` with `F(a, b) = 1 − s`, plus an absolute error bound.
fn powered_upper(n: SampleSize, a: f64, b: f64, rho: f64) -> Result<(f64, f64)> {
    let u = bvn_upper_detailed(BvnTailQuery::new(a, b, rho)?);
    if !u.converged {
        return Err(Error::Quadrature {
            value: u.value(),
            error_estimate: u.value() * u.rel_error,
            evaluations: 0,
        });
    }
    let (sa, sb) = (std_normal_sf(a), std_normal_sf(b));
    let joint = u.value();
    let s = (sa + sb - joint).max(0.0);
    let nv = n.value();
    let f_n = (nv * (-s).ln_1p()).exp();
    let err_s = 4.0 * EPS * (sa + sb) + joint * (u.rel_error + 4.0 * EPS);
    Ok((f_n, nv * err_s * f_n + 4.0 * EPS))
}

/// `(P(X ≤ −a, Y ≤ b))^n` style lower terms, given `ln` of the per-pair probability.
fn powered_small(n: SampleSize, log_p: f64) -> f64 {
    if log_p == f64::NEG_INFINITY {
        0.0
    } else {
        (n.value() * log_p).exp()
    }
}

/// Exact `P(|M₁|^t ≤ c x + d, |M₂|^t ≤ c y + d)`.
pub fn joint_powered_max_cdf(nc: &NormingConstants, rho: f64, x: f64, y: f64) -> Result<FiniteLawPoint> {
    check_rho(rho)?;
    let (a, b) = (nc.omega(x)?, nc.omega(y)?);
    let n = nc.n;
    let (upper, upper_err) = powered_upper(n, a, b, rho)?;

    // (−X, −Y) has the same correlation, so every lower corner is an upper orthant
    let lower_ab = bvn_upper_detailed(BvnTailQuery::new(a, -b, rho)?); // F(−a, b)
    let lower_ba = bvn_upper_detailed(BvnTailQuery::new(-a, b, rho)?); // F(a, −b)
    let corner = bvn_upper_detailed(BvnTailQuery::new(a, b, rho)?); // F(−a, −b)
    let t_ab = powered_small(n, lower_ab.log_value);
    let t_ba = powered_small(n, lower_ba.log_value);
    let t_corner = powered_small(n, corner.log_value);

    let prob = upper - t_ab - t_ba + t_corner;
    let small_err = n.value() * (t_ab * lower_ab.rel_error + t_ba * lower_ba.rel_error + t_corner * corner.rel_error);
    let prob = prob.clamp(0.0, 1.0);
    Ok(FiniteLawPoint {
        n,
        rho,
        t: nc.scheme.t(),
        scheme: nc.scheme,
        x,
        y,
        prob,
        log_prob: prob.ln(),
        upper_prob: upper,
        accuracy_estimate: upper_err + small_err + 4.0 * EPS,
    })
}

/// `P(|M₁|^t ≤ c x + d)` for one coordinate.
pub fn marginal_powered_max_cdf(nc: &NormingConstants, x: f64) -> Result<f64> {
    let a = nc.omega(x)?;
    let nv = nc.n.value();
    let upper = (nv * (-std_normal_sf(a)).ln_1p()).exp();
    let lower = (nv * std_normal_sf_log(a).ln()).exp();
    Ok(upper - lower)
}

/// Distance between the finite-`n` law and its limit at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaResult {
    pub n: SampleSize,
    pub b_n: f64,
    pub rho: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub scale_exponent: u32,
    /// `(ln n)^p Δ`.
    pub scaled_logn: f64,
    /// `(b_n²/2)^p Δ`.
    pub scaled_bn2: f64,
    pub limit: f64,
    /// `scaled_logn − limit`.
    pub residual: f64,
    pub accuracy_estimate: f64,
}

/// One rate experiment: a correlation sequence, its limiting regime, the
/// norming scheme and a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProblem {
    pub rho_seq: RhoSequence,
    pub regime: DependenceRegime,
    pub scheme: NormingScheme,
    pub x: f64,
    pub y: f64,
    pub convention: BnConvention,
}

impl RateProblem {
    pub fn new(rho_seq: RhoSequence, regime: DependenceRegime, scheme: NormingScheme, x: f64, y: f64) -> Result<Self> {
        let p = RateProblem {
            rho_seq,
            regime,
            scheme,
            x,
            y,
            convention: BnConvention::TailProbability,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_convention(mut self, convention: BnConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Rejects sequences whose limit regime differs from `regime`.
    pub fn validate(&self) -> Result<()> {
        self.rho_seq.validate()?;
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(Error::domain("x and y must be finite"));
        }
        let lam = self.regime.lambda;
        let ok = match self.rho_seq {
            RhoSequence::FromLambdaAlpha => matches!(lam, Lambda::Finite(_)),
            RhoSequence::Constant(1.0) => lam == Lambda::Zero,
            RhoSequence::Constant(_) => lam == Lambda::Infinite,
            RhoSequence::PowerSix { .. } => lam == Lambda::Zero && self.scheme.kind() == SchemeKind::Standard,
            RhoSequence::PowerFourteen { .. } => lam == Lambda::Zero,
            RhoSequence::LogRatioNull => lam == Lambda::Infinite,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidCombination(format!(
                "correlation sequence {:?} does not lead to lambda {:?} under {:?} norming",
                self.rho_seq,
                lam,
                self.scheme.kind()
            )))
        }
    }

    pub fn limit(&self) -> Result<TheoremLimit> {
        theorem_limit(self.regime, self.scheme, self.x, self.y)
    }

    pub fn delta_at(&self, n: SampleSize) -> Result<DeltaResult> {
        self.validate()?;
        let nc = make_norming_with(n, self.scheme, self.convention);
        let rho = rho_at_bn(self.rho_seq, nc.b_n, self.regime)?;
        let law = joint_powered_max_cdf(&nc, rho, self.x, self.y)?;
        let lim = self.limit()?;
        let h = hr_cdf_at(self.regime.lambda, self.x, self.y);
        let delta = law.prob - h;
        let delta_tilde = law.upper_prob - h;
        let p = lim.scale_exponent as i32;
        let scaled_logn = n.ln().powi(p) * delta;
        let scaled_bn2 = (0.5 * nc.b_n * nc.b_n).powi(p) * delta;
        Ok(DeltaResult {
            n,
            b_n: nc.b_n,
            rho,
            delta,
            delta_tilde,
            scale_exponent: lim.scale_exponent,
            scaled_logn,
            scaled_bn2,
            limit: lim.limit_value,
            residual: scaled_logn - lim.limit_value,
            accuracy_estimate: law.accuracy_estimate,
        })
    }

    /// Rows in ladder order; a failing row does not abort the others.
    pub fn rate_table(&self, ladder: &[SampleSize]) -> Result<RateTable> {
        self.validate()?;
        if ladder.is_empty() {
            return Err(Error::domain("ladder must not be empty"));
        }
        if ladder.windows(2).any(|w| w[1].value() <= w[0].value()) {
            return Err(Error::domain("ladder must be strictly increasing"));
        }
        let rows: Vec<Result<DeltaResult>> = ladder.par_iter().map(|&n| self.delta_at(n)).collect();
        let extrapolated = match rows.as_slice() {
            [.., Ok(r1), Ok(r2)] => Some(richardson(r1, r2)),
            _ => None,
        };
        Ok(RateTable {
            limit: self.limit()?,
            rows,
            extrapolated,
        })
    }
}

/// Limit estimate from the model `scaled(n) = L + C/ln n` through two rows.
pub fn richardson(r1: &DeltaResult, r2: &DeltaResult) -> f64 {
    let (l1, l2) = (r1.n.ln(), r2.n.ln());
    (r2.scaled_logn * l2 - r1.scaled_logn * l1) / (l2 - l1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub limit: TheoremLimit,
    pub rows: Vec<Result<DeltaResult>>,
    /// Present when the ladder has at least two rows and the last two succeeded.
    pub extrapolated: Option<f64>,
}
