//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre nodes on [a, b] with panels of width about `width`.
pub fn composite_nodes(a: f64, b: f64, width: f64, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in rule {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// `P(X > h, Y > k)` by a 2-D tensor grid over `[h, 10] × [k, 10]` of the
/// bivariate normal density. Mass beyond 10 is below 1e-23.
pub fn bvn_bruteforce(h: f64, k: f64, rho: f64) -> f64 {
    let rule = gauss_legendre(16);
    let xs = composite_nodes(h, 10.0, 0.2, &rule);
    let ys = composite_nodes(k, 10.0, 0.2, &rule);
    let s2 = 1.0 - rho * rho;
    let norm = 1.0 / (2.0 * PI * s2.sqrt());
    let mut total = 0.0;
    for &(x, wx) in &xs {
        let mut row = 0.0;
        for &(y, wy) in &ys {
            row += wy * (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * s2)).exp();
        }
        total += wx * row;
    }
    total * norm
}

/// Standard normal density from its definition.
pub fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// erf by its Maclaurin series; accurate for |x| below about 2.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..300 {
        term *= -x * x / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / PI.sqrt()
}

/// Standard normal distribution function for |z| up to about 2.8.
pub fn cdf_series(z: f64) -> f64 {
    0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2))
}

/// Natural log of the Mills ratio by its Laplace continued fraction (z > 1).
pub fn log_mills_cf(z: f64) -> f64 {
    let mut acc = z;
    for n in (1..2000).rev() {
        acc = z + n as f64 / acc;
    }
    -acc.ln()
}

/// `ln Φ̄(z)` from the continued fraction, for z > 1.
pub fn log_sf_cf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln() + log_mills_cf(z)
}
