//! Adaptive Gauss–Kronrod quadrature.
//!
//! The integrator bisects the panel with the largest error estimate until the
//! summed estimate drops below `max(rel_tol * |value|, abs_tol)` or the
//! subinterval budget is spent. Semi-infinite integrals are truncated at a
//! point where an `exp(-z/2)` envelope of the integrand carries less than a
//! tenth of the absolute tolerance; that envelope mass is added to the error
//! estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::special::{std_normal_cdf, std_normal_sf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False when the subinterval budget ran out before the tolerance was met.
    pub converged: bool,
}

impl QuadResult {
    /// Converts a non-converged result into [`Error::Quadrature`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature {
                value: self.value,
                error_estimate: self.error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_subintervals: 4000,
        }
    }
}

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// 21-point Kronrod rule with the embedded 10-point Gauss rule on `[a, b]`.
/// Returns `(value, error_estimate)` using the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_g = 0.0;
    let mut res_k = f_center * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += wg * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half.abs();
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrates `f` over the consecutive panels delimited by `points`
/// (which must be nondecreasing; zero-width panels are skipped).
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: &QuadOptions) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let mut total = 0.0;
    let mut total_err = 0.0;

    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, error) = gk21(&f, a, b);
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Panel { a, b, value, error });
    }
    if heap.is_empty() {
        return QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
    }

    let tolerance = |v: f64| (opts.rel_tol * v.abs()).max(opts.abs_tol);
    let mut converged = total_err <= tolerance(total);

    while !converged && heap.len() < opts.max_subintervals {
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        // resum periodically to shed accumulated cancellation
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
        converged = total_err <= tolerance(total);
    }

    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error_estimate: f64 = heap.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error_estimate,
        evaluations,
        converged: error_estimate <= tolerance(value),
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    integrate_panels(f, &[a, b], opts)
}

/// Point beyond which the mass of `exp(-z/2)` is below `abs_tol / 10`.
fn envelope_cutoff(abs_tol: f64) -> f64 {
    2.0 * (20.0 / abs_tol).ln()
}

/// Integrates `f` over `[lower, ∞)`.
///
/// `f` must be continuous and bounded by `exp(-z/2)` for large `z`; every
/// integrand in this crate is an exponential times a polynomial times a
/// Gaussian distribution function and qualifies.
pub fn quad_semi_infinite<F: Fn(f64) -> f64>(f: F, lower: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    let opts = QuadOptions {
        rel_tol,
        abs_tol,
        ..QuadOptions::default()
    };
    quad_semi_infinite_with(f, lower, &opts)
}

pub fn quad_semi_infinite_with<F: Fn(f64) -> f64>(f: F, lower: f64, opts: &QuadOptions) -> QuadResult {
    let cutoff = envelope_cutoff(opts.abs_tol);
    let upper = if lower < cutoff { cutoff } else { lower + cutoff };
    let tail_bound = 2.0 * (-0.5 * upper).exp();

    // geometric breakpoints concentrate the initial panels near `lower`,
    // where the exponentially weighted integrands carry their mass
    let mut points = vec![lower];
    let mut step = 0.5;
    while points.last().copied().unwrap_or(lower) + step < upper {
        let next = points[points.len() - 1] + step;
        points.push(next);
        step *= 2.0;
    }
    points.push(upper);

    let mut res = integrate_panels(f, &points, opts);
    res.error_estimate += tail_bound;
    res
}

/// Checks the closed form of the limiting joint-exceedance integral:
/// `∫_y^∞ Φ̄(λ + (x − z)/(2λ)) e^{−z} dz` against
/// `e^{−y} + e^{−x} − Φ(λ + (x − y)/(2λ)) e^{−y} − Φ(λ + (y − x)/(2λ)) e^{−x}`.
///
/// Returns the quadrature value of the left side and the closed-form right side.
pub fn verify_identity_32(lambda: f64, x: f64, y: f64) -> Result<(QuadResult, f64)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive and finite, got {lambda}")));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::domain("x and y must be finite"));
    }
    let two_l = 2.0 * lambda;
    let lhs = quad_semi_infinite(
        |z| std_normal_sf(lambda + (x - z) / two_l) * (-z).exp(),
        y,
        DEFAULT_REL_TOL,
        DEFAULT_ABS_TOL,
    );
    let rhs = (-y).exp() + (-x).exp()
        - std_normal_cdf(lambda + (x - y) / two_l) * (-y).exp()
        - std_normal_cdf(lambda + (y - x) / two_l) * (-x).exp();
    Ok((lhs, rhs))
}
