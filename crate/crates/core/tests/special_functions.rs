mod common;

use powmax::special::*;
use proptest::prelude::*;

fn q(h: f64, k: f64, rho: f64) -> BvnTailQuery {
    BvnTailQuery::new(h, k, rho).unwrap()
}

#[test]
fn cdf_matches_erf_series_near_centre() {
    for i in -280..=280 {
        let z = i as f64 / 100.0;
        let r = common::cdf_series(z);
        assert!((std_normal_cdf(z) - r).abs() <= 2e-15, "z={z}");
    }
}

#[test]
fn log_survival_matches_continued_fraction() {
    for z in [1.5, 3.0, 5.0, 10.0, 20.0, 38.0, 100.0] {
        let got = std_normal_sf_log(z).ln();
        let want = common::log_sf_cf(z);
        assert!(((got - want) / want).abs() <= 1e-13, "z={z}: {got} vs {want}");
    }
    let z10 = std_normal_sf_log(10.0).ln();
    assert!((z10 - common::log_sf_cf(10.0)).abs() <= 1e-10);
}

#[test]
fn tiny_survival_has_relative_accuracy() {
    for z in [8.0, 12.0, 20.0, 30.0, 37.0] {
        let want = common::log_sf_cf(z).exp();
        let got = std_normal_sf(z);
        assert!(((got - want) / want).abs() <= 1e-12, "z={z}");
    }
}

#[test]
fn mills_ratio_tracks_continued_fraction() {
    for z in [1.5, 4.0, 9.0, 40.0] {
        let got = mills_ratio(z).unwrap().ln();
        assert!((got - common::log_mills_cf(z)).abs() <= 1e-13, "z={z}");
    }
}

#[test]
fn quantile_rejects_endpoints() {
    assert!(std_normal_quantile(0.0).is_err());
    assert!(std_normal_quantile(1.0).is_err());
    assert!(std_normal_quantile(f64::NAN).is_err());
}

#[test]
fn inverse_survival_log_recovers_deep_tails() {
    for z in [2.0, 6.0, 15.0, 30.0, 60.0] {
        let back = std_normal_inverse_sf_log(std_normal_sf_log(z).ln()).unwrap();
        assert!((back - z).abs() <= 1e-12 * z, "z={z}: {back}");
    }
}

#[test]
fn bvn_against_tensor_grid() {
    for &(h, k, rho) in &[(1.0, 1.0, 0.5), (0.0, 0.0, -0.3), (-0.5, 1.2, 0.8), (2.0, 1.5, 0.95)] {
        let got = bvn_upper(q(h, k, rho));
        let want = common::bvn_bruteforce(h, k, rho);
        assert!((got - want).abs() <= 1e-12, "({h},{k},{rho}): {got} vs {want}");
    }
}

#[test]
fn bvn_orthant_at_origin() {
    for rho in [-0.9, -0.4, 0.0, 0.3, 0.99] {
        let want = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
        assert!((bvn_upper(q(0.0, 0.0, rho)) - want).abs() <= 1e-14, "rho={rho}");
    }
}

#[test]
fn bvn_degenerate_correlations() {
    for &(h, k) in &[(0.3, -1.0), (2.0, 2.5), (-1.0, -1.0)] {
        let hi = bvn_upper(q(h, k, 1.0));
        assert!((hi - std_normal_sf(h.max(k))).abs() <= 1e-15);
        let lo = bvn_upper(q(h, k, -1.0));
        let want = (std_normal_cdf(-k) - std_normal_cdf(h)).max(0.0);
        assert!((lo - want).abs() <= 1e-15, "({h},{k})");
    }
}

#[test]
fn bvn_deep_tail_log_value() {
    // At rho = 0 the orthant is the product of marginal tails.
    let got = bvn_upper_log(q(20.0, 25.0, 0.0));
    let want = common::log_sf_cf(20.0) + common::log_sf_cf(25.0);
    assert!(((got - want) / want).abs() <= 1e-13);
    let d = bvn_upper_detailed(q(8.0, 8.0, 0.6));
    assert!(d.converged && d.rel_error <= 1e-10);
}

#[test]
fn bvn_query_validates() {
    assert!(BvnTailQuery::new(0.0, 0.0, 1.5).is_err());
    assert!(BvnTailQuery::new(f64::NAN, 0.0, 0.1).is_err());
}

proptest! {
    #[test]
    fn reflection(z in -37.0f64..37.0) {
        let s = std_normal_sf(z) + std_normal_cdf(z);
        prop_assert!((s - 1.0).abs() <= 2e-16);
        prop_assert_eq!(std_normal_sf(z), std_normal_cdf(-z));
    }

    #[test]
    fn quantile_round_trip(e in -12.0f64..-0.0, upper in any::<bool>()) {
        let p0 = 10f64.powf(e).min(0.5);
        let p = if upper { 1.0 - p0 } else { p0 };
        let back = std_normal_cdf(std_normal_quantile(p).unwrap());
        prop_assert!((back - p).abs() <= 1e-13 * p.min(1.0 - p).max(1e-3), "p={}", p);
    }

    #[test]
    fn bvn_exchange_symmetry(h in -3.0f64..5.0, k in -3.0f64..5.0, rho in -0.99f64..0.99) {
        let a = bvn_upper(q(h, k, rho));
        let b = bvn_upper(q(k, h, rho));
        prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300) + 1e-300);
    }

    #[test]
    fn bvn_independence_product(h in -4.0f64..6.0, k in -4.0f64..6.0) {
        let want = std_normal_sf(h) * std_normal_sf(k);
        prop_assert!((bvn_upper(q(h, k, 0.0)) - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn bvn_monotone(h in -3.0f64..4.0, k in -3.0f64..4.0, dh in 0.01f64..1.0, rho in -0.95f64..0.95) {
        let base = bvn_upper(q(h, k, rho));
        prop_assert!(bvn_upper(q(h + dh, k, rho)) <= base * (1.0 + 1e-12));
        prop_assert!(bvn_upper(q(h, k + dh, rho)) <= base * (1.0 + 1e-12));
        prop_assert!(bvn_upper(q(h, k, (rho + 0.04).min(0.99))) >= base * (1.0 - 1e-12));
    }

    #[test]
    fn bvn_frechet_bounds(h in -3.0f64..3.0, k in -3.0f64..3.0, rho in -1.0f64..1.0) {
        let v = bvn_upper(q(h, k, rho));
        let (sh, sk) = (std_normal_sf(h), std_normal_sf(k));
        prop_assert!(v <= sh.min(sk) + 1e-15);
        prop_assert!(v >= (sh + sk - 1.0).max(0.0) - 1e-15);
    }
}
