use gausswalk::balancer::{dyadic_scale, DyadicRouter, Signer};
use gausswalk::harness::fixed_point::{ks_statistic, normal_cdf};
use gausswalk::harness::Generator;
use gausswalk::theta::{check_balance_inequality, eval_p, eval_r_product, eval_r_series};
use gausswalk::{full_coloring, Balancer, Mode, SparseVector, Walk, WalkError, WalkParams, DEFAULT_TOL};

// Values from an independent 40-digit evaluation of the theta series.
#[test]
fn kernel_matches_reference_values() {
    let p = |x, s| eval_p(x, s, DEFAULT_TOL).unwrap().value;
    let r = |s, f| eval_r_series(WalkParams::new(s, f).unwrap(), DEFAULT_TOL).unwrap().value;
    assert!((p(0.0, 1.0) - 0.481_972_621_832_437_55).abs() < DEFAULT_TOL);
    assert!((r(1.0, 0.0) - 0.036_054_756_335_124_906).abs() < DEFAULT_TOL);
    assert!((p(1.5, 1.0) - 0.128_719_916_572_169_52).abs() < DEFAULT_TOL);
    assert!((r(1.0, 0.3) - 0.022_167_897_354_864_435).abs() < DEFAULT_TOL);
    assert!((r(1.3, 0.4) - 5.042_756_734_977_542e-4).abs() < DEFAULT_TOL);
    let product = eval_r_product(WalkParams::new(1.3, -0.4).unwrap(), DEFAULT_TOL).unwrap().value;
    assert!((product - 5.042_756_734_977_542e-4).abs() < DEFAULT_TOL);
    let m = check_balance_inequality(WalkParams::new(8.0, 0.0).unwrap()).unwrap();
    assert!(m.holds && (m.margin - 0.496_078_451_396_776).abs() < 1e-10);
}

#[test]
fn balance_walk_needs_unit_sigma() {
    assert!(matches!(
        Balancer::new(Mode::Balance, 0.99, 0.01, 0),
        Err(WalkError::Domain { .. })
    ));
    assert!(Balancer::new(Mode::Partial, 0.2, 0.01, 0).is_ok());
}

#[test]
fn one_dimensional_distributions_have_their_supports() {
    for x in [-3.2, -0.5, 0.0, 0.49, 7.25] {
        let j = Walk::Jacobi.distribution(x, 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(j.prob(2), 0.0);
        let r = Walk::Ramanujan.distribution(x, 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(r.prob(0), 0.0);
        assert!(r.prob(1) > 0.0 && r.prob(-1) > 0.0);
    }
}

/// The walk point stays `N(0, sigma^2 I)` coordinatewise after many mixed steps.
#[test]
fn balancer_point_stays_gaussian() {
    for (mode, sigma) in [(Mode::Partial, 1.0), (Mode::Balance, 1.0), (Mode::Balance, 1.5)] {
        let runs = 3000;
        let mut ends = Vec::with_capacity(runs);
        for seed in 0..runs as u64 {
            let mut b = Balancer::new(mode, sigma, 0.01, seed).unwrap();
            for v in Generator::RandomUnit.stream(3, 0, seed).take(40) {
                b.process(&v).unwrap();
            }
            ends.push(b.point(0).unwrap());
        }
        let ks = ks_statistic(&mut ends, |x| normal_cdf(x, sigma));
        // 1.95 / sqrt(m) is the 0.1% critical value.
        assert!(ks < 1.95 / (runs as f64).sqrt(), "{mode:?} {sigma}: {ks}");
    }
}

#[test]
fn full_coloring_uses_every_vector() {
    let vectors: Vec<SparseVector> = Generator::MixedNorms.stream(16, 0, 2).take(3000).collect();
    let out = full_coloring(&vectors, 1.0, 0.01, 2).unwrap();
    assert_eq!(out.signs.len(), vectors.len());
    assert!(out.signs.iter().all(|&s| s == 1 || s == -1));
    assert!(out.rounds >= 1 && out.rounds <= 10);
}

#[test]
fn dyadic_router_opens_few_scales() {
    let t = 10_000;
    let mut router = DyadicRouter::new(Mode::Balance, 0.01, 4).unwrap();
    for v in Generator::MixedNorms.stream(32, 0, 4).take(t) {
        let rec = router.sign(&v).unwrap();
        assert!([-1, 1, 2].contains(&rec.sign));
    }
    let cap = (2.0 * (t as f64).powi(2)).log2().ceil() as usize;
    assert!(router.active_scales() <= cap);
    assert!(router.scale_ids().all(|k| k <= 28));
    assert!(router.filtered() > 0);
    assert_eq!(router.counts().total(), t as u64);
}

#[test]
fn dyadic_classes_cover_norm_ranges() {
    assert_eq!(dyadic_scale(1.0), 0);
    assert_eq!(dyadic_scale(0.5), 1);
    assert_eq!(dyadic_scale(0.75), 1);
    assert_eq!(dyadic_scale(0.25), 2);
    assert_eq!(dyadic_scale(0.2), 3);
}
