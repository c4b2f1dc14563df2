mod common;

use powmax::finite_law::*;
use powmax::hr::hr_cdf_at;
use powmax::norming::*;
use powmax::special::std_normal_cdf;
use proptest::prelude::*;

fn size(v: f64) -> SampleSize {
    SampleSize::new(v).unwrap()
}

fn nc(v: f64, t: f64) -> NormingConstants {
    make_norming(size(v), NormingScheme::standard(t).unwrap())
}

/// `P(X ≤ a, Y ≤ b)` from the series CDF and the tensor-grid orthant.
fn cdf2(a: f64, b: f64, rho: f64) -> f64 {
    1.0 - (1.0 - common::cdf_series(a)) - (1.0 - common::cdf_series(b)) + common::bvn_bruteforce(a, b, rho)
}

#[test]
fn small_n_matches_inclusion_exclusion_oracle() {
    let n = 20;
    let k = nc(n as f64, 1.0);
    for &rho in &[-0.5, 0.3, 0.8] {
        for &(x, y) in &[(-1.0, 0.5), (0.0, 0.0), (1.0, -0.3)] {
            let (a, b) = (k.omega(x).unwrap(), k.omega(y).unwrap());
            let want = cdf2(a, b, rho).powi(n) - cdf2(-a, b, rho).powi(n) - cdf2(a, -b, rho).powi(n)
                + cdf2(-a, -b, rho).powi(n);
            let got = joint_powered_max_cdf(&k, rho, x, y).unwrap();
            assert!((got.prob - want).abs() <= 1e-12, "rho={rho} ({x},{y}): {} vs {want}", got.prob);
            assert!(got.accuracy_estimate < 1e-10);
        }
    }
}

#[test]
fn independence_factorizes() {
    for v in [10.0, 1e4, 1e12] {
        let k = nc(v, 2.0);
        for &(x, y) in &[(-0.5, 0.5), (1.0, 2.0), (0.0, 0.0)] {
            let joint = joint_powered_max_cdf(&k, 0.0, x, y).unwrap().prob;
            let prod = marginal_powered_max_cdf(&k, x).unwrap() * marginal_powered_max_cdf(&k, y).unwrap();
            assert!((joint - prod).abs() <= 1e-14, "n={v}");
        }
    }
}

#[test]
fn comonotone_rows_collapse_to_the_marginal() {
    let k = nc(1e6, 1.5);
    for x in [-1.0, 0.0, 2.0] {
        let joint = joint_powered_max_cdf(&k, 1.0, x, x).unwrap().prob;
        assert!((joint - marginal_powered_max_cdf(&k, x).unwrap()).abs() <= 1e-14);
    }
}

#[test]
fn joint_exceedance_rate_near_its_limit() {
    let regime = DependenceRegime::finite(1.0, 0.0).unwrap();
    let k = nc(1e6, 1.0);
    let rho = rho_at_bn(RhoSequence::FromLambdaAlpha, k.b_n, regime).unwrap();
    let s = per_obs_joint_survival(&k, rho, 0.0, 0.0).unwrap();
    assert!((s - (2.0 - 2.0 * std_normal_cdf(1.0))).abs() <= 0.05, "{s}");
}

#[test]
fn law_approaches_the_limit_distribution() {
    let regime = DependenceRegime::finite(1.0, 0.0).unwrap();
    let p = RateProblem::new(RhoSequence::FromLambdaAlpha, regime, NormingScheme::standard(1.0).unwrap(), 0.0, 0.0).unwrap();
    let r = p.delta_at(size(1e16)).unwrap();
    let h = hr_cdf_at(Lambda::Finite(1.0), 0.0, 0.0);
    assert!(r.delta.abs() <= 2e-2);
    assert!(((r.delta + h) - h).abs() <= 2e-2);
}

#[test]
fn both_scalings_agree_up_to_their_ratio() {
    let p = RateProblem::new(
        RhoSequence::Constant(0.0),
        DependenceRegime::independent(),
        NormingScheme::starred(),
        0.5,
        0.5,
    )
    .unwrap();
    let r = p.delta_at(size(1e16)).unwrap();
    let ratio = (0.5 * r.b_n * r.b_n / r.n.ln()).powi(2);
    assert!((r.scaled_bn2 - ratio * r.scaled_logn).abs() <= 1e-14 * r.scaled_bn2.abs());
}

#[test]
fn independent_rate_within_a_factor_two() {
    let p = RateProblem::new(
        RhoSequence::Constant(0.0),
        DependenceRegime::independent(),
        NormingScheme::standard(1.0).unwrap(),
        1.0,
        1.0,
    )
    .unwrap();
    let r = p.delta_at(size(1e8)).unwrap();
    let q = r.scaled_logn / r.limit;
    assert!((0.5..=2.0).contains(&q), "{q}");
}

#[test]
fn residual_shrinks_along_ladder() {
    let regime = DependenceRegime::finite(1.0, 0.0).unwrap();
    let p = RateProblem::new(RhoSequence::FromLambdaAlpha, regime, NormingScheme::standard(1.0).unwrap(), 0.0, 0.0).unwrap();
    let ladder: Vec<_> = [1e3, 1e6, 1e12, 1e24].iter().map(|&v| size(v)).collect();
    let table = p.rate_table(&ladder).unwrap();
    let res: Vec<f64> = table.rows.iter().map(|r| r.as_ref().unwrap().residual.abs()).collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
    assert!(table.extrapolated.is_some());
}

#[test]
fn richardson_recovers_an_exact_inverse_log_law() {
    let p = RateProblem::new(
        RhoSequence::Constant(0.0),
        DependenceRegime::independent(),
        NormingScheme::standard(1.0).unwrap(),
        0.0,
        0.0,
    )
    .unwrap();
    let mut r1 = p.delta_at(size(1e4)).unwrap();
    let mut r2 = p.delta_at(size(1e8)).unwrap();
    r1.scaled_logn = 0.3 + 2.0 / r1.n.ln();
    r2.scaled_logn = 0.3 + 2.0 / r2.n.ln();
    assert!((richardson(&r1, &r2) - 0.3).abs() <= 1e-14);
}

#[test]
fn problem_validation() {
    let std = NormingScheme::standard(1.0).unwrap();
    assert!(RateProblem::new(RhoSequence::Constant(0.5), DependenceRegime::complete(), std, 0.0, 0.0).is_err());
    assert!(RateProblem::new(RhoSequence::FromLambdaAlpha, DependenceRegime::independent(), std, 0.0, 0.0).is_err());
    assert!(RateProblem::new(RhoSequence::PowerSix { c: 1.0 }, DependenceRegime::complete(), NormingScheme::starred(), 0.0, 0.0).is_err());
    assert!(RateProblem::new(RhoSequence::LogRatioNull, DependenceRegime::independent(), std, f64::NAN, 0.0).is_err());
    let ok = RateProblem::new(RhoSequence::Constant(0.0), DependenceRegime::independent(), std, 0.0, 0.0).unwrap();
    assert!(ok.rate_table(&[]).is_err());
    assert!(ok.rate_table(&[size(1e8), size(1e4)]).is_err());
    assert!(joint_powered_max_cdf(&nc(100.0, 1.0), 1.5, 0.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn law_is_a_distribution(
        e in 3.0f64..20.0, t in 0.5f64..3.0, rho in -0.99f64..0.999,
        x in -1.5f64..3.0, y in -1.5f64..3.0, d in 0.01f64..1.0,
    ) {
        let k = nc(10f64.powf(e).round(), t);
        let p = joint_powered_max_cdf(&k, rho, x, y).unwrap().prob;
        prop_assert!(p > 0.0 && p < 1.0);
        prop_assert!(joint_powered_max_cdf(&k, rho, x + d, y).unwrap().prob >= p - 1e-14);
        prop_assert!(joint_powered_max_cdf(&k, rho, x, y + d).unwrap().prob >= p - 1e-14);
        let (mx, my) = (marginal_powered_max_cdf(&k, x).unwrap(), marginal_powered_max_cdf(&k, y).unwrap());
        prop_assert!(p <= mx.min(my) + 1e-14);
        prop_assert!(p >= mx + my - 1.0 - 1e-14);
    }

    #[test]
    fn law_exchangeable(e in 1.0f64..20.0, rho in -0.9f64..0.99, x in -1.0f64..2.0, y in -1.0f64..2.0) {
        let k = nc(10f64.powf(e).round(), 1.0);
        let a = joint_powered_max_cdf(&k, rho, x, y).unwrap().prob;
        let b = joint_powered_max_cdf(&k, rho, y, x).unwrap().prob;
        prop_assert!((a - b).abs() <= 1e-13);
    }
}
