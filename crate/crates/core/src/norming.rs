//! Norming constants for powered Gaussian maxima and the correlation
//! sequences that tie a triangular array to a dependence regime.

use crate::error::{Error, Result};
use crate::special::{std_normal_inverse_sf_log, LN_SQRT_2PI};

/// Largest supported sample size.
pub const MAX_SAMPLE_SIZE: f64 = 1e24;
const EXACT_INTEGER_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

/// Row length `n` of the array, carried through its logarithm so sizes up
/// to `1e24` are usable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SampleSize {
    value: f64,
    log_n: f64,
}

impl SampleSize {
    /// Accepts `3 ≤ n ≤ 1e24`; values below `2^53` must be integers.
    pub fn new(n: f64) -> Result<Self> {
        if !n.is_finite() || n < 3.0 {
            return Err(Error::domain(format!("sample size must be at least 3, got {n}")));
        }
        if n > MAX_SAMPLE_SIZE {
            return Err(Error::domain(format!("sample size {n:e} exceeds the supported maximum 1e24")));
        }
        if n < EXACT_INTEGER_LIMIT && n.fract() != 0.0 {
            return Err(Error::domain(format!("sample size must be an integer, got {n}")));
        }
        Ok(SampleSize { value: n, log_n: n.ln() })
    }

    pub fn from_u64(n: u64) -> Result<Self> {
        Self::new(n as f64)
    }

    #[inline]
    pub fn ln(&self) -> f64 {
        self.log_n
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn log10(&self) -> f64 {
        self.value.log10()
    }

    /// Exact integer value when it fits in `u64` without rounding.
    pub fn as_u64(&self) -> Option<u64> {
        (self.value < EXACT_INTEGER_LIMIT).then_some(self.value as u64)
    }
}

/// How the centring level `b_n` is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BnConvention {
    /// `1 − Φ(b_n) = 1/n`.
    #[default]
    TailProbability,
    /// `n φ(b_n) = b_n`, the level under which the two-term tail
    /// expansions carry no extra `b_n^{-2}` shift.
    HallDensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Standard,
    /// Refined constants for squared maxima; only defined for `t = 2`.
    Starred,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingScheme {
    kind: SchemeKind,
    t: f64,
}

impl NormingScheme {
    pub fn standard(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("power index t must be positive and finite, got {t}")));
        }
        Ok(NormingScheme {
            kind: SchemeKind::Standard,
            t,
        })
    }

    pub fn starred() -> Self {
        NormingScheme {
            kind: SchemeKind::Starred,
            t: 2.0,
        }
    }

    pub fn new(kind: SchemeKind, t: f64) -> Result<Self> {
        match kind {
            SchemeKind::Standard => Self::standard(t),
            SchemeKind::Starred if t == 2.0 => Ok(Self::starred()),
            SchemeKind::Starred => Err(Error::InvalidCombination(format!(
                "starred norming requires t = 2, got t = {t}"
            ))),
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn is_starred(&self) -> bool {
        self.kind == SchemeKind::Starred
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingConstants {
    pub n: SampleSize,
    pub b_n: f64,
    pub c: f64,
    pub d: f64,
    pub scheme: NormingScheme,
}

impl NormingConstants {
    /// Builds the constants for a given centring level.
    pub fn from_bn(n: SampleSize, b_n: f64, scheme: NormingScheme) -> Result<Self> {
        if !(b_n > 0.0 && b_n.is_finite()) {
            return Err(Error::domain(format!("b_n must be positive, got {b_n}")));
        }
        let (c, d) = match scheme.kind {
            SchemeKind::Standard => {
                let t = scheme.t;
                (t * b_n.powf(t - 2.0), b_n.powf(t))
            }
            SchemeKind::Starred => {
                let inv2 = 2.0 / (b_n * b_n);
                (2.0 - inv2, b_n * b_n - inv2)
            }
        };
        Ok(NormingConstants { n, b_n, c, d, scheme })
    }

    /// Threshold `ω(x) = (c x + d)^{1/t}` on the absolute maximum.
    pub fn omega(&self, x: f64) -> Result<f64> {
        let level = self.c * x + self.d;
        if !(level > 0.0) || !level.is_finite() {
            return Err(Error::domain(format!(
                "c*x + d = {level} is not positive at x = {x} for n = {:e}",
                self.n.value()
            )));
        }
        let t = self.scheme.t;
        Ok(if t == 1.0 {
            level
        } else if t == 2.0 {
            level.sqrt()
        } else {
            level.powf(1.0 / t)
        })
    }

    /// `a_n = 1/b_n`.
    pub fn a_n(&self) -> f64 {
        1.0 / self.b_n
    }
}

/// `b_n` with `1 − Φ(b_n) = 1/n`.
pub fn solve_bn(n: SampleSize) -> f64 {
    solve_bn_with(n, BnConvention::TailProbability)
}

pub fn solve_bn_with(n: SampleSize, convention: BnConvention) -> f64 {
    match convention {
        BnConvention::TailProbability => {
            // n ≥ 3 keeps the log tail strictly negative
            std_normal_inverse_sf_log(-n.ln()).expect("log tail is negative for n >= 3")
        }
        BnConvention::HallDensity => {
            // b²/2 + ln b + ln√(2π) = ln n, increasing in b
            let target = n.ln() - LN_SQRT_2PI;
            let mut b = (2.0 * n.ln()).sqrt();
            for _ in 0..50 {
                let f = 0.5 * b * b + b.ln() - target;
                let step = f / (b + 1.0 / b);
                let next = (b - step).max(0.5 * b);
                if (next - b).abs() <= 4.0 * f64::EPSILON * b {
                    b = next;
                    break;
                }
                b = next;
            }
            b
        }
    }
}

pub fn make_norming(n: SampleSize, scheme: NormingScheme) -> NormingConstants {
    make_norming_with(n, scheme, BnConvention::TailProbability)
}

pub fn make_norming_with(n: SampleSize, scheme: NormingScheme, convention: BnConvention) -> NormingConstants {
    NormingConstants::from_bn(n, solve_bn_with(n, convention), scheme).expect("b_n is positive for n >= 3")
}

/// Dependence strength of the limit law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    /// Complete dependence.
    Zero,
    Finite(f64),
    /// Independence.
    Infinite,
}

impl Lambda {
    /// `0` maps to `Zero`, `+inf` to `Infinite`, anything else positive to `Finite`.
    pub fn new(value: f64) -> Result<Self> {
        if value == 0.0 {
            Ok(Lambda::Zero)
        } else if value == f64::INFINITY {
            Ok(Lambda::Infinite)
        } else if value > 0.0 {
            Ok(Lambda::Finite(value))
        } else {
            Err(Error::domain(format!("lambda must be >= 0, got {value}")))
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Lambda::Zero => 0.0,
            Lambda::Finite(v) => v,
            Lambda::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceRegime {
    pub lambda: Lambda,
    /// Second-order parameter; only used when `lambda` is finite.
    pub alpha: f64,
}

impl DependenceRegime {
    pub fn new(lambda: Lambda, alpha: f64) -> Result<Self> {
        if let Lambda::Finite(v) = lambda {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("finite lambda must be positive, got {v}")));
            }
        }
        if !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(DependenceRegime { lambda, alpha })
    }

    pub fn finite(lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(Lambda::Finite(lambda), alpha)
    }

    pub fn independent() -> Self {
        DependenceRegime {
            lambda: Lambda::Infinite,
            alpha: 0.0,
        }
    }

    pub fn complete() -> Self {
        DependenceRegime {
            lambda: Lambda::Zero,
            alpha: 0.0,
        }
    }
}

/// Correlation `ρ_n` as a function of the row length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSequence {
    /// `ρ_n = 1 − 2λ_n²/b_n²` with `λ_n = λ + α b_n^{-2}`.
    FromLambdaAlpha,
    Constant(f64),
    /// `ρ_n = 1 − c b_n^{-6}`.
    PowerSix { c: f64 },
    /// `ρ_n = 1 − c b_n^{-14}`.
    PowerFourteen { c: f64 },
    /// `ρ_n = 1 − (ln b_n)²/b_n²`: correlation tends to one, but slowly
    /// enough that the limit is independence.
    LogRatioNull,
}

impl RhoSequence {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RhoSequence::Constant(r) if !(r.abs() <= 1.0) => {
                Err(Error::domain(format!("constant correlation must lie in [-1, 1], got {r}")))
            }
            RhoSequence::PowerSix { c } | RhoSequence::PowerFourteen { c } if !(c >= 0.0 && c.is_finite()) => {
                Err(Error::domain(format!("sequence constant must be >= 0, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

/// `ρ_n` at row length `n`, using the default tail-probability `b_n`.
pub fn rho_at(spec: RhoSequence, n: SampleSize, regime: DependenceRegime) -> Result<f64> {
    rho_at_bn(spec, solve_bn(n), regime)
}

/// `ρ_n` for a given centring level `b_n`. Results outside `[-1, 1]` are
/// errors, never clamped.
pub fn rho_at_bn(spec: RhoSequence, b_n: f64, regime: DependenceRegime) -> Result<f64> {
    spec.validate()?;
    let b2 = b_n * b_n;
    let rho = match spec {
        RhoSequence::FromLambdaAlpha => {
            let lambda = match regime.lambda {
                Lambda::Finite(v) => v,
                other => {
                    return Err(Error::InvalidCombination(format!(
                        "lambda/alpha correlation sequence needs a finite lambda, got {other:?}"
                    )))
                }
            };
            let lambda_n = lambda + regime.alpha / b2;
            if lambda_n < 0.0 {
                return Err(Error::OutOfRange(format!(
                    "lambda_n = {lambda_n} is negative at b_n = {b_n}"
                )));
            }
            1.0 - 2.0 * lambda_n * lambda_n / b2
        }
        RhoSequence::Constant(r) => r,
        RhoSequence::PowerSix { c } => 1.0 - c / (b2 * b2 * b2),
        RhoSequence::PowerFourteen { c } => 1.0 - c * b_n.powi(-14),
        RhoSequence::LogRatioNull => {
            let l = b_n.ln();
            1.0 - l * l / b2
        }
    };
    if !(rho.abs() <= 1.0) {
        return Err(Error::OutOfRange(format!("correlation {rho} outside [-1, 1] at b_n = {b_n}")));
    }
    Ok(rho)
}

/// `λ_n = (b_n²(1 − ρ_n)/2)^{1/2}`.
pub fn lambda_n(b_n: f64, rho: f64) -> f64 {
    (0.5 * b_n * b_n * (1.0 - rho)).sqrt()
}
