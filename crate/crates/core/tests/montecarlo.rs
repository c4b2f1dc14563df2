use powmax::finite_law::{joint_powered_max_cdf, marginal_powered_max_cdf};
use powmax::montecarlo::*;
use powmax::norming::*;

fn std1() -> NormingScheme {
    NormingScheme::standard(1.0).unwrap()
}

fn grid() -> Vec<(f64, f64)> {
    vec![(-1.0, -1.0), (-0.5, 0.5), (0.0, 0.0), (1.0, -0.5), (1.5, 1.5)]
}

#[test]
fn same_seed_same_estimates() {
    let cfg = SimConfig::new(500, 2_000, 0.4, std1(), grid(), 11);
    let a = simulate_powered_maxima(&cfg).unwrap();
    let b = simulate_powered_maxima(&cfg).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = 12;
    assert_ne!(a, simulate_powered_maxima(&other).unwrap());
}

#[test]
fn independent_rows_match_exact_law() {
    let cfg = SimConfig::new(1_000, 100_000, 0.0, NormingScheme::standard(2.0).unwrap(), grid(), 3);
    let s = empirical_vs_exact(&cfg).unwrap();
    assert!(!s.degenerate);
    for e in &s.estimates {
        assert!(e.z_score.unwrap().abs() <= 4.0, "{e:?}");
    }
}

#[test]
fn moderate_n_cross_check_against_exact_law() {
    let cfg = SimConfig::new(10_000, 1_000_000, 0.5, std1(), vec![(0.5, -0.5)], 2024);
    let e = simulate_powered_maxima(&cfg).unwrap()[0];
    let k = make_norming(SampleSize::from_u64(10_000).unwrap(), std1());
    let exact = joint_powered_max_cdf(&k, 0.5, 0.5, -0.5).unwrap().prob;
    assert_eq!(e.exact_prob, exact);
    assert!((e.empirical_prob - exact).abs() <= 3.5 * e.standard_error, "{e:?}");
}

#[test]
fn marginal_frequency_matches() {
    let k = make_norming(SampleSize::from_u64(100).unwrap(), std1());
    let reps = 200_000;
    for x in [-0.5, 0.5, 2.0] {
        let p = marginal_powered_max_cdf(&k, x).unwrap();
        let f = simulate_marginal(&k, x, reps, 5).unwrap();
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * se, "x={x}: {f} vs {p}");
    }
}

#[test]
fn rows_have_the_requested_correlation() {
    let rho = 0.6;
    let row = simulate_row(100_000, rho, 9, 0).unwrap();
    let m = row.len() as f64;
    let (mx, my) = row.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in &row {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let r = sxy / (sxx * syy).sqrt();
    assert!((r - rho).abs() <= 0.02, "{r}");
    assert!((sxx / m - 1.0).abs() <= 0.02 && (syy / m - 1.0).abs() <= 0.02);
    assert!(mx.abs() <= 0.02 && my.abs() <= 0.02);
    assert!(simulate_row(10, 1.5, 0, 0).is_err());
}

#[test]
fn shifted_reference_is_detected() {
    let cfg = SimConfig::new(1_000, 50_000, 0.3, std1(), grid(), 8);
    let est: Vec<SimEstimate> = simulate_powered_maxima(&cfg)
        .unwrap()
        .into_iter()
        .map(|mut e| {
            e.set_exact(e.exact_prob + 10.0 * e.standard_error);
            e
        })
        .collect();
    let s = summarize(est);
    assert_eq!(s.fraction_above_3, 1.0);
    assert!(s.max_abs_z.unwrap() > 5.0);
}

#[test]
fn thinned_and_direct_samplers_agree() {
    let reps = 100_000;
    let mut thin = SimConfig::new(60, reps, 0.7, NormingScheme::starred(), grid(), 17);
    thin.sampler = Sampler::Thinned;
    let mut direct = thin.clone();
    direct.sampler = Sampler::Direct;
    direct.seed = 18;
    let a = simulate_powered_maxima(&thin).unwrap();
    let b = simulate_powered_maxima(&direct).unwrap();
    for (ea, eb) in a.iter().zip(&b) {
        let se = (ea.standard_error.powi(2) + eb.standard_error.powi(2)).sqrt();
        assert!((ea.empirical_prob - eb.empirical_prob).abs() <= 4.0 * se, "{ea:?} vs {eb:?}");
    }
}

#[test]
fn configuration_errors() {
    let base = SimConfig::new(100, 10, 0.0, std1(), grid(), 1);
    let mut c = base.clone();
    c.n = 2;
    assert!(simulate_powered_maxima(&c).is_err());
    let mut c = base.clone();
    c.reps = 0;
    assert!(simulate_powered_maxima(&c).is_err());
    let mut c = base.clone();
    c.rho = -1.1;
    assert!(simulate_powered_maxima(&c).is_err());
    let mut c = base.clone();
    c.grid.clear();
    assert!(simulate_powered_maxima(&c).is_err());
    let mut c = base.clone();
    c.budget = Some(500.0);
    assert!(matches!(simulate_powered_maxima(&c), Err(powmax::Error::Resource(_))));
}
