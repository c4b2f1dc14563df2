//! Standard normal primitives that stay accurate deep in the upper tail.
//!
//! The univariate distribution function follows W. J. Cody's rational
//! Chebyshev approximations (the scheme behind R's `pnorm`), arranged so the
//! upper tail is always available as `exp(-z²/2) · factor`. That factor gives
//! the Mills ratio and the log survival function directly, without
//! underflow. The quantile uses Wichura's AS 241 followed by Halley steps
//! against the distribution function.
//!
//! The bivariate upper orthant `P(X > h, Y > k)` is a one-dimensional
//! conditional integral of the univariate survival function, evaluated in a
//! log-scaled form so relative accuracy holds for tiny probabilities.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, QuadOptions};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
/// Correlations this close to ±1 use the degenerate closed forms.
pub const DEGENERATE_RHO_GAP: f64 = 1e-14;

/// Natural log of a probability in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub fn new(log_value: f64) -> Result<Self> {
        if log_value <= 0.0 {
            Ok(LogProb(log_value))
        } else {
            Err(Error::domain(format!("log-probability must be <= 0, got {log_value}")))
        }
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

/// Upper tail `Φ̄(y)` for `y ≥ 0`, either as a plain value or as
/// `exp(-xsq²/2) · exp(-del/2) · factor` with `xsq² + del = y²` exactly.
enum Tail {
    Direct(f64),
    Scaled { xsq: f64, del: f64, factor: f64 },
}

impl Tail {
    fn log_gauss(&self) -> f64 {
        match *self {
            Tail::Direct(_) => unreachable!("direct tail has no gaussian factor"),
            Tail::Scaled { xsq, del, .. } => -0.5 * xsq * xsq - 0.5 * del,
        }
    }

    fn value(&self) -> f64 {
        match *self {
            Tail::Direct(v) => v,
            Tail::Scaled { xsq, del, factor } => (-0.5 * xsq * xsq).exp() * (-0.5 * del).exp() * factor,
        }
    }

    fn ln(&self) -> f64 {
        match *self {
            Tail::Direct(v) => v.ln(),
            Tail::Scaled { factor, .. } => self.log_gauss() + factor.ln(),
        }
    }
}

#[inline]
fn split_square(y: f64) -> (f64, f64) {
    let xsq = (y * 16.0).trunc() / 16.0;
    (xsq, (y - xsq) * (y + xsq))
}

#[allow(clippy::excessive_precision)]
fn upper_tail(y: f64) -> Tail {
    debug_assert!(y >= 0.0);
    const A: [f64; 5] = [
        2.2352520354606839287,
        161.02823106855587881,
        1067.6894854603709582,
        18154.981253343561249,
        0.065682337918207449113,
    ];
    const B: [f64; 4] = [
        47.20258190468824187,
        976.09855173777669322,
        10260.932208618978205,
        45507.789335026729956,
    ];
    const C: [f64; 9] = [
        0.39894151208813466764,
        8.8831497943883759412,
        93.506656132177855979,
        597.27027639480026226,
        2494.5375852903726711,
        6848.1904505362823326,
        11602.651437647350124,
        9842.7148383839780218,
        1.0765576773720192317e-8,
    ];
    const D: [f64; 8] = [
        22.266688044328115691,
        235.38790178262499861,
        1519.377599407554805,
        6485.558298266760755,
        18615.571640885098091,
        34900.952721145977266,
        38912.003286093271411,
        19685.429676859990727,
    ];
    const P: [f64; 6] = [
        0.21589853405795699,
        0.1274011611602473639,
        0.022235277870649807,
        0.001421619193227893466,
        2.9112874951168792e-5,
        0.02307344176494017303,
    ];
    const Q: [f64; 5] = [
        1.28426009614491121,
        0.468238212480865118,
        0.0659881378689285515,
        0.00378239633202758244,
        7.29751555083966205e-5,
    ];

    if y <= 0.674_489_75 {
        let (xnum, xden) = if y > f64::EPSILON * 0.5 {
            let ysq = y * y;
            let mut xnum = A[4] * ysq;
            let mut xden = ysq;
            for i in 0..3 {
                xnum = (xnum + A[i]) * ysq;
                xden = (xden + B[i]) * ysq;
            }
            (xnum, xden)
        } else {
            (0.0, 0.0)
        };
        let temp = y * (xnum + A[3]) / (xden + B[3]);
        Tail::Direct(0.5 - temp)
    } else if y <= 32f64.sqrt() {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        let factor = (xnum + C[7]) / (xden + D[7]);
        let (xsq, del) = split_square(y);
        Tail::Scaled { xsq, del, factor }
    } else {
        let rsq = 1.0 / (y * y);
        let mut xnum = P[5] * rsq;
        let mut xden = rsq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * rsq;
            xden = (xden + Q[i]) * rsq;
        }
        let temp = rsq * (xnum + P[4]) / (xden + Q[4]);
        let factor = (FRAC_1_SQRT_2PI - temp) / y;
        let (xsq, del) = split_square(y);
        Tail::Scaled { xsq, del, factor }
    }
}

/// Standard normal density `φ(z)`.
pub fn std_normal_pdf(z: f64) -> f64 {
    let y = z.abs();
    if y < 5.0 {
        FRAC_1_SQRT_2PI * (-0.5 * y * y).exp()
    } else {
        let (xsq, del) = split_square(y);
        FRAC_1_SQRT_2PI * (-0.5 * xsq * xsq).exp() * (-0.5 * del).exp()
    }
}

/// `ln φ(z)`; finite for every finite `z`.
pub fn std_normal_log_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal survival function `Φ̄(z) = 1 − Φ(z)`.
pub fn std_normal_sf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z >= 0.0 {
        upper_tail(z).value()
    } else {
        1.0 - upper_tail(-z).value()
    }
}

/// Standard normal distribution function `Φ(z)`.
pub fn std_normal_cdf(z: f64) -> f64 {
    std_normal_sf(-z)
}

/// `ln Φ̄(z)` without underflow for large `z`.
pub fn std_normal_sf_log(z: f64) -> LogProb {
    let v = if z >= 0.0 {
        upper_tail(z).ln()
    } else {
        (-upper_tail(-z).value()).ln_1p()
    };
    LogProb(v.min(0.0))
}

/// `ln Φ(z)`.
pub fn std_normal_cdf_log(z: f64) -> LogProb {
    std_normal_sf_log(-z)
}

/// Mills ratio `Φ̄(z)/φ(z)` for `z > 0`.
pub fn mills_ratio(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("mills ratio requires z > 0, got {z}")));
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    Ok(match upper_tail(z) {
        Tail::Direct(v) => v / std_normal_pdf(z),
        Tail::Scaled { factor, .. } => factor * SQRT_2PI,
    })
}

/// Wichura's AS 241 (PPND16). `log_tail` is `ln min(p, 1 − p)` and is only
/// consulted in the tails, so callers can pass it without forming a tiny `p`.
#[allow(clippy::excessive_precision)]
fn as241(q: f64, log_tail: f64) -> f64 {
    // q = p - 1/2
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let mut r = (-log_tail).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966)
                * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5)
                * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Unrefined quantile, accurate to a few ulps; used for bulk sampling.
#[inline]
pub(crate) fn quantile_unrefined(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        as241(q, 0.0)
    } else {
        as241(q, p.min(1.0 - p).ln())
    }
}

/// Unrefined upper quantile `Φ̄⁻¹(tail)` for `tail ≤ 1/2`, for bulk sampling.
#[inline]
pub(crate) fn upper_quantile_unrefined(tail: f64) -> f64 {
    let q = 0.5 - tail;
    if q.abs() <= 0.425 {
        as241(q, 0.0)
    } else {
        as241(q, tail.ln())
    }
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile requires 0 < p < 1, got {p}")));
    }
    let mut z = quantile_unrefined(p);
    // Halley steps; above the median the residual is formed from the exact
    // complement 1 - p so the upper tail keeps full relative accuracy.
    for _ in 0..2 {
        let dens = std_normal_pdf(z);
        if dens == 0.0 {
            break;
        }
        let e = if p <= 0.5 {
            std_normal_cdf(z) - p
        } else {
            (1.0 - p) - std_normal_sf(z)
        };
        let u = e / dens;
        z -= u / (1.0 + 0.5 * z * u);
    }
    Ok(z)
}

/// Solves `ln Φ̄(z) = log_tail` for `log_tail < 0`.
pub fn std_normal_inverse_sf_log(log_tail: f64) -> Result<f64> {
    if !(log_tail < 0.0) {
        return Err(Error::domain(format!("log tail must be negative, got {log_tail}")));
    }
    if log_tail > -0.075f64.ln().abs() {
        // central region: tail = exp(log_tail) is not small
        let tail = log_tail.exp();
        return std_normal_quantile(1.0 - tail).map(|z| {
            // one Newton step in log space recovers what 1 - tail rounded away
            let resid = std_normal_sf_log(z).ln() - log_tail;
            z + resid * mills_or_inf(z)
        });
    }
    let mut z = as241(0.5, log_tail);
    for _ in 0..3 {
        let resid = std_normal_sf_log(z).ln() - log_tail;
        // d/dz ln Φ̄(z) = -1/mills(z)
        z += resid * mills_or_inf(z);
    }
    Ok(z)
}

fn mills_or_inf(z: f64) -> f64 {
    if z > 0.0 {
        mills_ratio(z).unwrap_or(0.0)
    } else {
        std_normal_sf(z) / std_normal_pdf(z)
    }
}

/// Arguments of the bivariate upper orthant probability `P(X > h, Y > k)`
/// for standard normals with correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvnTailQuery {
    h: f64,
    k: f64,
    rho: f64,
}

impl BvnTailQuery {
    pub fn new(h: f64, k: f64, rho: f64) -> Result<Self> {
        if !(h.is_finite() && k.is_finite()) {
            return Err(Error::domain(format!("thresholds must be finite, got ({h}, {k})")));
        }
        if !(rho.abs() <= 1.0) {
            return Err(Error::domain(format!("correlation must lie in [-1, 1], got {rho}")));
        }
        Ok(BvnTailQuery { h, k, rho })
    }

    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Bivariate upper orthant in log form, with a relative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvnTail {
    /// `ln P(X > h, Y > k)`; `-inf` when the probability is exactly zero.
    pub log_value: f64,
    pub rel_error: f64,
    pub converged: bool,
}

impl BvnTail {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

const BVN_REL_TOL: f64 = 1e-13;
/// Integration stops where the scaled integrand has dropped by this many nats.
const BVN_LOG_DROP: f64 = 52.0;

/// `P(X > h, Y > k)`.
pub fn bvn_upper(q: BvnTailQuery) -> f64 {
    bvn_upper_detailed(q).value()
}

/// `ln P(X > h, Y > k)`; `-inf` when the event is impossible (`rho = -1`).
pub fn bvn_upper_log(q: BvnTailQuery) -> f64 {
    bvn_upper_detailed(q).log_value
}

pub fn bvn_upper_detailed(q: BvnTailQuery) -> BvnTail {
    let BvnTailQuery { h, k, rho } = q;
    let exact = |log_value: f64| BvnTail {
        log_value,
        rel_error: 0.0,
        converged: true,
    };

    if rho == 0.0 {
        return exact(std_normal_sf_log(h).ln() + std_normal_sf_log(k).ln());
    }
    if rho >= 1.0 - DEGENERATE_RHO_GAP {
        return exact(std_normal_sf_log(h.max(k)).ln());
    }
    if rho <= -1.0 + DEGENERATE_RHO_GAP {
        // X > h and -X > k, i.e. h < X < -k
        if h + k >= 0.0 {
            return exact(f64::NEG_INFINITY);
        }
        let p = if h >= 0.0 {
            std_normal_sf(h) - std_normal_sf(-k)
        } else if -k <= 0.0 {
            std_normal_cdf(-k) - std_normal_cdf(h)
        } else {
            1.0 - std_normal_cdf(h) - std_normal_cdf(k)
        };
        return exact(p.max(0.0).ln());
    }

    // integrate over the variable with the larger threshold
    let (h, k) = if k >= h { (h, k) } else { (k, h) };
    conditional_integral(h, k, rho)
}

/// `∫_k^∞ Φ̄((h − ρz)/σ) φ(z) dz` with `σ = √(1 − ρ²)`, scaled by the
/// maximum of the integrand. The log integrand is concave, so the mass sits
/// in a single window around its mode.
fn conditional_integral(h: f64, k: f64, rho: f64) -> BvnTail {
    let sigma = ((1.0 - rho) * (1.0 + rho)).sqrt();
    let log_f = |z: f64| std_normal_sf_log((h - rho * z) / sigma).ln() + std_normal_log_pdf(z);
    // derivative of log_f; decreasing in z
    let slope = |z: f64| {
        let w = (h - rho * z) / sigma;
        let hazard = if w > 0.0 {
            1.0 / mills_ratio(w).unwrap_or(f64::INFINITY)
        } else {
            std_normal_pdf(w) / std_normal_sf(w)
        };
        rho / sigma * hazard - z
    };

    // mode of the integrand on [k, ∞)
    let mode = if slope(k) <= 0.0 {
        k
    } else {
        let mut lo = k;
        let mut step = 1.0;
        let mut hi = k + step;
        while slope(hi) > 0.0 {
            lo = hi;
            step *= 2.0;
            hi = k + step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let peak = log_f(mode);
    let floor = peak - BVN_LOG_DROP;

    // right end of the window
    let mut step = 1.0;
    let mut right = mode + step;
    while log_f(right) > floor {
        step *= 2.0;
        right = mode + step;
    }
    // left end, clipped at k
    let left = if mode > k && log_f(k) < floor {
        let (mut lo, mut hi) = (k, mode);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if log_f(mid) < floor {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    } else {
        k
    };

    let mut points = vec![left];
    if mode > left {
        points.push(mode);
    }
    // steep step of the conditional survival factor when sigma is small
    if rho > 0.0 {
        let knee = h / rho;
        if knee > points[points.len() - 1] && knee < right {
            points.push(knee);
        }
    }
    points.push(right);
    points.sort_by(f64::total_cmp);

    let opts = QuadOptions {
        rel_tol: BVN_REL_TOL,
        abs_tol: 0.0,
        max_subintervals: 2000,
    };
    let res = integrate_panels(|z| (log_f(z) - peak).exp(), &points, &opts);
    let rel_error = if res.value > 0.0 {
        res.error_estimate / res.value + 1e-15
    } else {
        f64::INFINITY
    };
    BvnTail {
        log_value: peak + res.value.ln(),
        rel_error,
        converged: res.converged,
    }
}
