//! Seeded Monte Carlo checks against exact oracles and pilot bands.

use cubeperc_core::btp::{btp_replicate, first_hit_replicate, BtpOutcome, DEFAULT_CAP};
use cubeperc_core::fpp::{richardson_replicate, unoriented_infection_times, LazyWeights, PassageDistribution};
use cubeperc_core::percolation::{exact_connection_probability, mc_connection_probability};
use cubeperc_core::rng::{replicate_rng, stream};
use cubeperc_core::stats::{ks_two_sample, mean_and_se, median, wilson_interval};
use rand_distr::{Distribution, Exp};

#[test]
fn percolation_matches_exact_enumeration() {
    for n in 1..=3 {
        for oriented in [true, false] {
            for i in 1..=9 {
                let p = i as f64 / 10.0;
                let exact = exact_connection_probability(n, p, oriented).unwrap();
                let est = mc_connection_probability(n, p * n as f64, 20_000, oriented, 11 + i).unwrap();
                let sigma = (exact * (1.0 - exact) / 20_000.0).sqrt().max(1e-9);
                assert!(
                    (est.estimate.point - exact).abs() <= 4.5 * sigma,
                    "n={n} p={p} oriented={oriented}: {} vs {exact}",
                    est.estimate.point
                );
            }
        }
    }
}

#[test]
fn harness_example_n3() {
    let exact = exact_connection_probability(3, 0.5, false).unwrap();
    let est = mc_connection_probability(3, 1.5, 100_000, false, 7).unwrap();
    let sigma = (exact * (1.0 - exact) / 1e5).sqrt();
    assert!((est.estimate.point - exact).abs() <= 3.0 * sigma);
}

fn exp_sample(rate: f64, m: usize, seed: u64) -> Vec<f64> {
    let d = Exp::new(rate).unwrap();
    let mut rng = stream(seed, 0, 0);
    (0..m).map(|_| d.sample(&mut rng)).collect()
}

#[test]
fn ks_separates_different_rates() {
    let (_, p) = ks_two_sample(&exp_sample(1.0, 10_000, 1), &exp_sample(2.0, 10_000, 2)).unwrap();
    assert!(p < 1e-6, "p = {p}");
}

#[test]
fn ks_null_is_calibrated() {
    let seeds = 200u64;
    let rejections = (0..seeds)
        .filter(|&s| {
            let (_, p) = ks_two_sample(&exp_sample(1.0, 10_000, 2 * s), &exp_sample(1.0, 10_000, 2 * s + 1)).unwrap();
            p <= 0.001
        })
        .count();
    assert!(rejections as f64 <= 0.01 * seeds as f64, "{rejections} rejections");
}

#[test]
fn wilson_examples() {
    let (lo, hi) = wilson_interval(0, 100, 0.95).unwrap();
    assert_eq!(lo, 0.0);
    assert!((hi - 0.037).abs() < 1e-3, "{hi}");
    let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
    assert!((lo + hi - 1.0).abs() < 1e-12);
    assert_eq!(wilson_interval(100, 100, 0.95).unwrap().1, 1.0);
    assert!(wilson_interval(0, 0, 0.95).is_err());
}

#[test]
fn yule_total_means() {
    for (n, t) in [(3u32, 0.5f64), (4, 0.4)] {
        let totals: Vec<f64> = (0..10_000)
            .map(|r| match btp_replicate(n, t, DEFAULT_CAP, 5, r).unwrap() {
                BtpOutcome::Snapshot(pop) => pop.total() as f64,
                BtpOutcome::Overflow { .. } => panic!("overflow at n={n}"),
            })
            .collect();
        let (mean, se) = mean_and_se(&totals).unwrap();
        let want = (n as f64 * t).exp();
        assert!((mean - want).abs() <= 4.0 * se, "n={n}: {mean} vs {want}");
    }
}

#[test]
fn btp_first_hit_median_band() {
    let taus: Vec<f64> = (0..500).map(|r| first_hit_replicate(8, DEFAULT_CAP, 3, r).unwrap().time()).collect();
    let m = median(&taus).unwrap();
    assert!((0.7..=1.2).contains(&m), "median {m}");
}

#[test]
fn btp_hits_no_later_than_richardson() {
    let reps = 2000;
    let tau: Vec<f64> = (0..reps).map(|r| first_hit_replicate(5, DEFAULT_CAP, 21, r).unwrap().time()).collect();
    let rich: Vec<f64> =
        (0..reps).map(|r| richardson_replicate(5, f64::INFINITY, 22, r).unwrap().antipode_time()).collect();
    let frac = |xs: &[f64], t: f64| xs.iter().filter(|&&x| x <= t).count() as f64 / reps as f64;
    for i in 1..=12 {
        let t = i as f64 * 0.25;
        let (a, b) = (frac(&tau, t), frac(&rich, t));
        let sigma = ((a * (1.0 - a) + b * (1.0 - b)) / reps as f64).sqrt();
        assert!(a >= b - 3.0 * sigma, "t={t}: {a} < {b}");
    }
}

#[test]
fn unoriented_passage_time_sanity_band() {
    let times: Vec<f64> = (0..8)
        .map(|r| {
            let mut rng = replicate_rng(99, r);
            unoriented_infection_times(&mut LazyWeights::new(20, PassageDistribution::Exponential, &mut rng))
                .unwrap()
                .antipode_time()
        })
        .collect();
    for t in times {
        assert!((0.5..=1.5).contains(&t), "T = {t}");
    }
}
