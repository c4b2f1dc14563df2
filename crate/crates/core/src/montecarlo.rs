//! Simulation of powered maxima, used to cross-check the exact finite-`n`
//! law at moderate `n`.
//!
//! Each replication owns a ChaCha8 stream selected by its index, so results
//! do not depend on thread count or scheduling. Normal variates come from
//! the inverse distribution function applied to those uniforms.
//!
//! The default [`Sampler::Thinned`] draws only the pairs that can influence
//! any grid event. A pair with `|X| ≤ L` and `|Y| ≤ K`, where `L` and `K`
//! sit just below the smallest thresholds on the grid, can never decide
//! whether a maximum leaves its window, as long as at least one such pair
//! exists. Their count is binomial, and the remaining pairs are drawn from
//! the exact conditional law, so the estimator has the same distribution as
//! the direct one.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finite_law::joint_powered_max_cdf;
use crate::norming::{make_norming, NormingConstants, NormingScheme, SampleSize};
use crate::special::{
    bvn_upper, quantile_unrefined, std_normal_sf, upper_quantile_unrefined, BvnTailQuery,
};

pub const DEFAULT_PAIR_BUDGET: f64 = 1e10;
pub const PAIR_BUDGET_ENV: &str = "POWMAX_PAIR_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    #[default]
    Thinned,
    /// Draws all `n` pairs of every replication.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: u64,
    pub reps: u64,
    pub rho: f64,
    pub scheme: NormingScheme,
    pub grid: Vec<(f64, f64)>,
    pub seed: u64,
    pub sampler: Sampler,
    /// Maximum `n · reps`; falls back to the environment override, then 1e10.
    pub budget: Option<f64>,
}

impl SimConfig {
    pub fn new(n: u64, reps: u64, rho: f64, scheme: NormingScheme, grid: Vec<(f64, f64)>, seed: u64) -> Self {
        SimConfig {
            n,
            reps,
            rho,
            scheme,
            grid,
            seed,
            sampler: Sampler::default(),
            budget: None,
        }
    }

    pub fn pair_budget(&self) -> Result<f64> {
        if let Some(b) = self.budget {
            return Ok(b);
        }
        match std::env::var(PAIR_BUDGET_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|b| *b > 0.0)
                .ok_or_else(|| Error::domain(format!("{PAIR_BUDGET_ENV} must be a positive number, got {s:?}"))),
            Err(_) => Ok(DEFAULT_PAIR_BUDGET),
        }
    }

    fn norming(&self) -> Result<NormingConstants> {
        if self.n < 3 {
            return Err(Error::domain(format!("n must be at least 3, got {}", self.n)));
        }
        if self.reps < 1 {
            return Err(Error::domain("reps must be at least 1"));
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(Error::domain(format!("correlation must lie in [-1, 1], got {}", self.rho)));
        }
        if self.grid.is_empty() {
            return Err(Error::domain("grid must not be empty"));
        }
        let pairs = self.n as f64 * self.reps as f64;
        let budget = self.pair_budget()?;
        if pairs > budget {
            return Err(Error::Resource(format!(
                "n * reps = {pairs:e} pair draws exceeds the budget {budget:e}"
            )));
        }
        Ok(make_norming(SampleSize::from_u64(self.n)?, self.scheme))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub point: (f64, f64),
    pub empirical_prob: f64,
    pub standard_error: f64,
    pub exact_prob: f64,
    /// Absent when the standard error is zero.
    pub z_score: Option<f64>,
}

impl SimEstimate {
    fn new(point: (f64, f64), hits: u64, reps: u64, exact_prob: f64) -> Self {
        let p = hits as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        let mut e = SimEstimate {
            point,
            empirical_prob: p,
            standard_error: se,
            exact_prob,
            z_score: None,
        };
        e.set_exact(exact_prob);
        e
    }

    /// Replaces the reference probability and recomputes the z-score.
    pub fn set_exact(&mut self, exact_prob: f64) {
        self.exact_prob = exact_prob;
        self.z_score = (self.standard_error > 0.0).then(|| (self.empirical_prob - exact_prob) / self.standard_error);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub estimates: Vec<SimEstimate>,
    pub max_abs_z: Option<f64>,
    pub fraction_above_3: f64,
    /// Some grid point had zero standard error, so its z-score is missing.
    pub degenerate: bool,
}

pub fn summarize(estimates: Vec<SimEstimate>) -> SimSummary {
    let zs: Vec<f64> = estimates.iter().filter_map(|e| e.z_score).map(f64::abs).collect();
    let max_abs_z = zs.iter().copied().reduce(f64::max);
    let fraction_above_3 = zs.iter().filter(|z| **z > 3.0).count() as f64 / estimates.len().max(1) as f64;
    let degenerate = zs.len() < estimates.len();
    SimSummary {
        estimates,
        max_abs_z,
        fraction_above_3,
        degenerate,
    }
}

/// Uniform on the open interval `(0, 1)`.
#[inline]
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

#[inline]
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    quantile_unrefined(open_uniform(rng))
}

fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Grid thresholds `(ω(x), ω(y))`.
fn thresholds(nc: &NormingConstants, grid: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    grid.iter().map(|&(x, y)| Ok((nc.omega(x)?, nc.omega(y)?))).collect()
}

/// Maxima of one replication, in the form the events need.
struct RepMaxima {
    m1: f64,
    m2: f64,
    /// When set, both maxima are known to lie above `-L` and `-K`.
    lower_safe: bool,
}

impl RepMaxima {
    #[inline]
    fn inside(&self, a: f64, b: f64) -> bool {
        let upper = self.m1 <= a && self.m2 <= b;
        upper && (self.lower_safe || (self.m1 >= -a && self.m2 >= -b))
    }
}

struct Thinning {
    /// `|X| ≤ l` and `|Y| ≤ k` for every pair left out
    l: f64,
    k: f64,
    sf_l: f64,
    sf_k: f64,
    /// `P(|X| > L)`
    p_a: f64,
    /// `P(|X| ≤ L, |Y| > K) / P(|X| ≤ L)`
    p_b_given_not_a: f64,
}

impl Thinning {
    fn new(thr: &[(f64, f64)], rho: f64) -> Self {
        let a_min = thr.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
        let b_min = thr.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        let (l, k) = (0.999 * a_min, 0.999 * b_min);
        let (sf_l, sf_k) = (std_normal_sf(l), std_normal_sf(k));
        let p_a = 2.0 * sf_l;
        let both = 2.0 * bvn_upper(BvnTailQuery::new(l, k, rho).expect("finite thresholds"))
            + 2.0 * bvn_upper(BvnTailQuery::new(l, k, -rho).expect("finite thresholds"));
        let p_b = (2.0 * sf_k - both).max(0.0);
        Thinning {
            l,
            k,
            sf_l,
            sf_k,
            p_a,
            p_b_given_not_a: (p_b / (1.0 - p_a)).clamp(0.0, 1.0),
        }
    }

    fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
        if p <= 0.0 || n == 0 {
            0
        } else if p >= 1.0 {
            n
        } else {
            Binomial::new(n, p).expect("valid binomial").sample(rng)
        }
    }

    #[inline]
    fn signed(rng: &mut ChaCha8Rng, magnitude: f64) -> f64 {
        if rng.next_u32() & 1 == 1 {
            magnitude
        } else {
            -magnitude
        }
    }

    fn run(&self, rng: &mut ChaCha8Rng, n: u64, rho: f64, sigma: f64) -> RepMaxima {
        let count_a = Self::binomial(rng, n, self.p_a);
        let count_b = Self::binomial(rng, n - count_a, self.p_b_given_not_a);
        let (mut m1, mut m2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);

        // |X| > L, Y unrestricted
        for _ in 0..count_a {
            let mag = upper_quantile_unrefined(open_uniform(rng) * self.sf_l);
            let x = Self::signed(rng, mag);
            let y = rho * x + sigma * std_normal(rng);
            m1 = m1.max(x);
            m2 = m2.max(y);
        }
        // |X| ≤ L, |Y| > K: draw Y from its tail, X given Y, reject |X| > L
        let mut drawn = 0;
        while drawn < count_b {
            let mag = upper_quantile_unrefined(open_uniform(rng) * self.sf_k);
            let y = Self::signed(rng, mag);
            let x = rho * y + sigma * std_normal(rng);
            if x.abs() <= self.l {
                m1 = m1.max(x);
                m2 = m2.max(y);
                drawn += 1;
            }
        }
        let rest = n - count_a - count_b;
        if rest > 0 {
            // the left-out pairs lie in [-L, L] x [-K, K], below every threshold
            m1 = m1.max(-self.l);
            m2 = m2.max(-self.k);
        }
        RepMaxima {
            m1,
            m2,
            lower_safe: rest > 0,
        }
    }
}

fn direct_rep(rng: &mut ChaCha8Rng, n: u64, rho: f64, sigma: f64) -> RepMaxima {
    let (mut m1, mut m2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..n {
        let x = std_normal(rng);
        let y = rho * x + sigma * std_normal(rng);
        m1 = m1.max(x);
        m2 = m2.max(y);
    }
    RepMaxima {
        m1,
        m2,
        lower_safe: false,
    }
}

/// Empirical grid probabilities with exact references from the finite law.
pub fn simulate_powered_maxima(cfg: &SimConfig) -> Result<Vec<SimEstimate>> {
    let nc = cfg.norming()?;
    let thr = thresholds(&nc, &cfg.grid)?;
    let rho = cfg.rho;
    let sigma = ((1.0 - rho) * (1.0 + rho)).max(0.0).sqrt();
    let thinning = (cfg.sampler == Sampler::Thinned).then(|| Thinning::new(&thr, rho));

    let counts = (0..cfg.reps)
        .into_par_iter()
        .fold(
            || vec![0u64; thr.len()],
            |mut acc, rep| {
                let mut rng = rep_rng(cfg.seed, rep);
                let m = match &thinning {
                    Some(th) => th.run(&mut rng, cfg.n, rho, sigma),
                    None => direct_rep(&mut rng, cfg.n, rho, sigma),
                };
                for (c, &(a, b)) in acc.iter_mut().zip(&thr) {
                    *c += m.inside(a, b) as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; thr.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    cfg.grid
        .iter()
        .zip(counts)
        .map(|(&(x, y), hits)| {
            let exact = joint_powered_max_cdf(&nc, rho, x, y)?.prob;
            Ok(SimEstimate::new((x, y), hits, cfg.reps, exact))
        })
        .collect()
}

pub fn empirical_vs_exact(cfg: &SimConfig) -> Result<SimSummary> {
    Ok(summarize(simulate_powered_maxima(cfg)?))
}

/// One full row of `n` pairs from replication `rep`'s stream.
pub fn simulate_row(n: usize, rho: f64, seed: u64, rep: u64) -> Result<Vec<(f64, f64)>> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::domain(format!("correlation must lie in [-1, 1], got {rho}")));
    }
    let sigma = ((1.0 - rho) * (1.0 + rho)).max(0.0).sqrt();
    let mut rng = rep_rng(seed, rep);
    Ok((0..n)
        .map(|_| {
            let x = std_normal(&mut rng);
            (x, rho * x + sigma * std_normal(&mut rng))
        })
        .collect())
}

/// Empirical `P(|M₁|^t ≤ c x + d)` of the first coordinate, by direct sampling.
pub fn simulate_marginal(nc: &NormingConstants, x: f64, reps: u64, seed: u64) -> Result<f64> {
    let a = nc.omega(x)?;
    let n = nc.n.as_u64().ok_or_else(|| Error::domain("n too large for simulation"))?;
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(seed, rep);
            let m = (0..n).map(|_| std_normal(&mut rng)).fold(f64::NEG_INFINITY, f64::max);
            (m.abs() <= a) as u64
        })
        .sum();
    Ok(hits as f64 / reps as f64)
}
