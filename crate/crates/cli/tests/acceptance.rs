//! Acceptance suite: one line per criterion with the measured quantities and
//! the time spent against its budget. A criterion is PASS, FAIL, or
//! UNATTAINABLE when exact bounds rule out its threshold; the detail then
//! shows the bounds and the consistency check run in its place. Exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cubeperc::{run, ExperimentSpec, Kind, Params};
use cubeperc_core::analytic::{
    btp_mean_level, btp_mean_top, btp_second_moment, erlang_tail, extinction_probability, second_moment_lower_bound,
    second_moment_ratio, theorem_constants,
};
use cubeperc_core::btp::{btp_replicate, first_hit_replicate, BtpOutcome, FirstHit, DEFAULT_CAP};
use cubeperc_core::combinatorics::{
    bound_large_k, overlap_table_bruteforce, overlap_table_dp, shared_edges, supplement_bijection, CornerPair,
};
use cubeperc_core::fpp::{
    cover_replicate, duality_experiment, ofpp_first_moment_bound, ofpp_replicate, richardson_replicate,
    unoriented_infection_times, PassageDistribution, WeightAssignment,
};
use cubeperc_core::math::ln_factorial;
use cubeperc_core::percolation::exact_connection_probability;
use cubeperc_core::rng::replicate_rng;
use cubeperc_core::stats::{ks_two_sample, mean_and_se, median};
use cubeperc_core::{PathPerm, Vertex};
use num_bigint::BigUint;

type Check = Result<String, String>;

#[derive(Clone, Copy, PartialEq)]
enum Verdict {
    Pass,
    Fail,
    /// The stated threshold contradicts exact bounds; the check that ran
    /// instead is reported in the detail.
    Unattainable,
}

const UNATTAINABLE: &str = "UNATTAINABLE: ";

fn criterion(id: u32, budget_s: u64, f: impl FnOnce() -> Check) -> Verdict {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(budget_s);
    let (verdict, detail) = match outcome {
        Ok(d) if !in_time => (Verdict::Fail, d),
        Ok(d) => match d.strip_prefix(UNATTAINABLE) {
            Some(rest) => (Verdict::Unattainable, rest.to_string()),
            None => (Verdict::Pass, d),
        },
        Err(d) => (Verdict::Fail, d),
    };
    let label = match verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Unattainable => "UNATTAINABLE",
    };
    let late = if in_time { "" } else { ", over budget" };
    println!("criterion {id:>2}: {label}  {detail} [{:.2}s / {budget_s}s{late}]", elapsed.as_secs_f64());
    verdict
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn extinction() -> Check {
    let r = extinction_probability(std::f64::consts::E).map_err(|e| e.to_string())?;
    ensure((r.limit_prob - 0.8416).abs() <= 5e-4, format!("(1-x(e))^2 = {}", r.limit_prob))?;
    Ok(format!("(1-x(e))^2 = {:.6}", r.limit_prob))
}

fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn path_counts() -> Check {
    for n in 1..=7 {
        let brute = overlap_table_bruteforce(n).map_err(|e| e.to_string())?;
        let dp = overlap_table_dp(n).map_err(|e| e.to_string())?;
        ensure(brute == dp, format!("brute force and DP differ at n = {n}"))?;
    }
    let t3 = overlap_table_dp(3).map_err(|e| e.to_string())?;
    let want: Vec<BigUint> = [3u32, 2, 0, 1].into_iter().map(BigUint::from).collect();
    ensure(t3.counts() == want.as_slice(), "f(3,.) != (3,2,0,1)")?;
    for n in 1..=12 {
        let t = overlap_table_dp(n).map_err(|e| e.to_string())?;
        let sum: BigUint = t.counts().iter().sum();
        ensure(sum == factorial(n), format!("sum f({n},k) != {n}!"))?;
        ensure(t.f(n as usize - 1) == BigUint::from(0u32), format!("f({n},{}) != 0", n - 1))?;
    }
    Ok("brute = DP for n <= 7, f(3,.) = (3,2,0,1), sums and f(n,n-1) = 0 for n <= 12".into())
}

fn large_k_bound() -> Check {
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for n in 1..=12u32 {
        let t = overlap_table_dp(n).map_err(|e| e.to_string())?;
        let k_min = n as f64 - (n as f64).powf(0.75) / 2.0;
        for k in (0..=n).filter(|&k| k as f64 >= k_min) {
            let bound = bound_large_k(n, k).map_err(|e| e.to_string())?;
            let exact = t.ln_big_f(k as usize);
            ensure(exact <= bound + 1e-12 * bound.abs().max(1.0), format!("ln F({n},{k}) = {exact} > {bound}"))?;
            tightest = tightest.min(bound - exact);
            checked += 1;
        }
    }
    Ok(format!("{checked} (n,k) pairs, smallest log margin {tightest:.4}"))
}

fn second_moment() -> Check {
    let mut worst = f64::INFINITY;
    for n in 1..=3 {
        let table = overlap_table_dp(n).map_err(|e| e.to_string())?;
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            let lower = second_moment_lower_bound(p, &table).map_err(|e| e.to_string())?;
            let exact = exact_connection_probability(n, p, true).map_err(|e| e.to_string())?;
            // n = 1 is an equality case (N is 0 or 1), so allow rounding.
            ensure(lower <= exact * (1.0 + 1e-12), format!("n={n} p={p}: bound {lower} > exact {exact}"))?;
            worst = worst.min(exact - lower);
        }
    }
    let ratio = second_moment_ratio(0.5, &overlap_table_dp(3).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure((ratio - 2.5).abs() <= 1e-12, format!("ratio at (3, 1/2) = {ratio}"))?;
    Ok(format!("bound <= exact on 27 cases (min gap {worst:.3e}), ratio(3, 1/2) = {ratio}"))
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn bijection() -> Check {
    let (mut configs, mut paths) = (0u64, 0u64);
    for dim in 3..=7u32 {
        for pad in 1..=(dim - 1) / 2 {
            let n = dim - 2 * pad;
            let at = |level: u32| -> Vec<Vertex> {
                (0..1u32 << dim).filter(|m| m.count_ones() == level).map(|m| Vertex::new(m, dim).unwrap()).collect()
            };
            let (lows, highs) = (at(pad), at(n + pad));
            let pairs: Vec<(Vertex, Vertex)> =
                lows.iter().flat_map(|&x| highs.iter().filter(move |y| x.is_subset_of(**y)).map(move |&y| (x, y))).collect();
            for &(x1, y1) in &pairs {
                for &(x2, y2) in &pairs {
                    if x1 == x2 || y1 == y2 {
                        continue;
                    }
                    let corners = CornerPair::new(n, pad, x1, x2, y1, y2).map_err(|e| e.to_string())?;
                    let gamma = corners.reference_path();
                    let span2 = y2.bits() & !x2.bits();
                    let mut images = HashSet::new();
                    for labels in permutations(gamma.labels()) {
                        let pi = PathPerm::new(labels, dim).map_err(|e| e.to_string())?;
                        let image = supplement_bijection(&corners, &pi).map_err(|e| e.to_string())?;
                        ensure(image.label_mask() == span2, "image is not a path x2 -> y2")?;
                        let before: HashSet<_> = shared_edges(x1, &pi, x1, &gamma).unwrap().into_iter().collect();
                        let after: HashSet<_> = shared_edges(x2, &image, x1, &gamma).unwrap().into_iter().collect();
                        ensure(after.is_subset(&before), format!("shared edges grew for {:?} in {corners:?}", pi.labels()))?;
                        let end_shared = pi.labels()[0] == gamma.labels()[0] || pi.labels()[n as usize - 1] == gamma.labels()[n as usize - 1];
                        ensure(!end_shared || after.len() < before.len(), format!("no strict contraction for {:?}", pi.labels()))?;
                        images.insert(image.labels().to_vec());
                        paths += 1;
                    }
                    let total = (1..=n as usize).product::<usize>();
                    ensure(images.len() == total, format!("not a bijection in {corners:?}"))?;
                    configs += 1;
                }
            }
        }
    }
    Ok(format!("{configs} corner configurations, {paths} paths"))
}

fn erlang() -> Check {
    for n in 0..=50u32 {
        for i in 1..=10 {
            let u = i as f64 / 10.0;
            let lead = (-u + n as f64 * u.ln() - ln_factorial(n as u64)).exp();
            let tail = erlang_tail(n, u);
            let upper = (1.0 + std::f64::consts::E / (n as f64 + 1.0)) * lead;
            ensure(lead <= tail * (1.0 + 1e-12) && tail <= upper * (1.0 + 1e-12), format!("sandwich fails at n={n}, u={u}"))?;
        }
    }
    Ok("lower <= P(S_n <= u) <= upper for n <= 50, u in 0.1..1.0".into())
}

fn richardson_vs_fpp() -> Check {
    let n = 4;
    let a: Vec<f64> = (0..2000).map(|r| richardson_replicate(n, f64::INFINITY, 101, r).unwrap().antipode_time()).collect();
    let b: Vec<f64> = (0..2000)
        .map(|r| {
            let mut w = WeightAssignment::sample(n, false, PassageDistribution::Exponential, &mut replicate_rng(102, r)).unwrap();
            unoriented_infection_times(&mut w).unwrap().antipode_time()
        })
        .collect();
    let (d, p) = ks_two_sample(&a, &b).map_err(|e| e.to_string())?;
    ensure(p > 0.001, format!("KS D = {d:.4}, p = {p:.2e}"))?;
    Ok(format!("KS D = {d:.4}, p = {p:.3}"))
}

fn snapshot(o: BtpOutcome) -> Result<cubeperc_core::btp::BtpPopulation, String> {
    match o {
        BtpOutcome::Snapshot(p) => Ok(p),
        BtpOutcome::Overflow { time, .. } => Err(format!("unexpected overflow at {time}")),
    }
}

fn btp_moments() -> Check {
    let (n, t) = (4u32, 0.5);
    let runs = (0..10_000).map(|r| snapshot(btp_replicate(n, t, DEFAULT_CAP, 103, r).unwrap())).collect::<Result<Vec<_>, _>>()?;
    let mut worst_z: f64 = 0.0;
    for k in 0..=n {
        let width = (0..1u32 << n).filter(|x| x.count_ones() == k).count() as f64;
        let per_vertex: Vec<f64> = runs
            .iter()
            .map(|p| p.counts().iter().enumerate().filter(|(x, _)| x.count_ones() == k).map(|(_, &c)| c as f64).sum::<f64>() / width)
            .collect();
        let (mean, se) = mean_and_se(&per_vertex).map_err(|e| e.to_string())?;
        let expect = btp_mean_level(n, k, t);
        let z = (mean - expect).abs() / se;
        ensure(z <= 4.0, format!("level {k}: {mean:.4} vs {expect:.4} ({z:.2} sigma)"))?;
        worst_z = worst_z.max(z);
    }
    let top = Vertex::top(3).unwrap();
    let sq: Vec<f64> = (0..100_000)
        .map(|r| snapshot(btp_replicate(3, 1.0, DEFAULT_CAP, 104, r).unwrap()).map(|p| (p.count(top) as f64).powi(2)))
        .collect::<Result<_, _>>()?;
    let (m2_mc, _) = mean_and_se(&sq).map_err(|e| e.to_string())?;
    let m2 = btp_second_moment(1.0, 3).map_err(|e| e.to_string())?;
    let rel = (m2_mc / m2 - 1.0).abs();
    ensure(rel < 0.05, format!("E Z(1,1)^2: MC {m2_mc:.4} vs {m2:.4}"))?;
    Ok(format!("levels within {worst_z:.2} sigma; E Z(top,1)^2 MC {m2_mc:.4} vs quadrature {m2:.4} ({:.2}%)", 100.0 * rel))
}

fn duality() -> Check {
    let mut parts = Vec::new();
    for (i, &(t, s)) in [(1.2, 0.6), (1.0, 0.3), (0.8, 0.8)].iter().enumerate() {
        let est = duality_experiment(6, t, s, 20_000, 105 + i as u64).map_err(|e| e.to_string())?;
        let z = est.z_score();
        ensure(z <= 3.0, format!("(t={t}, s={s}): {:.4} vs {:.4}, {z:.2} sigma", est.left.point, est.right.point))?;
        parts.push(format!("({t},{s}) {:.4}/{:.4}", est.left.point, est.right.point));
    }
    Ok(parts.join(", "))
}

fn ofpp() -> Check {
    let mut medians = Vec::new();
    let mut at20 = Vec::new();
    for &n in &[8u32, 12, 16, 20] {
        let times: Vec<f64> = (0..200).map(|r| ofpp_replicate(n, PassageDistribution::Exponential, 106, r).unwrap()).collect();
        medians.push(median(&times).unwrap());
        if n == 20 {
            at20 = times;
        }
    }
    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    ensure(inversions <= 1, format!("medians {medians:?}"))?;
    ensure((0.85..=1.35).contains(&medians[3]), format!("n = 20 median {}", medians[3]))?;
    let freq = at20.iter().filter(|&&t| t <= 0.8).count() as f64 / at20.len() as f64;
    let bound = ofpp_first_moment_bound(20, 0.2, 0.0).unwrap();
    let sigma = (bound * (1.0 - bound) / at20.len() as f64).sqrt();
    ensure(freq <= bound + 3.0 * sigma, format!("P(T <= 0.8) = {freq} > {bound} + 3 sigma"))?;
    let shown: Vec<String> = medians.iter().map(|m| format!("{m:.3}")).collect();
    Ok(format!("medians n=8,12,16,20: [{}], freq(T <= 0.8) = {freq} <= {bound:.4} + 3 sigma", shown.join(", ")))
}

fn cover() -> Check {
    let c = theorem_constants();
    let times: Vec<f64> = (0..200).map(|r| cover_replicate(12, 107, r).unwrap()).collect();
    let max = times.iter().copied().fold(0.0, f64::max);
    let below = times.iter().filter(|&&t| t < c.cover_lower).count();
    ensure(max < c.cover_upper, format!("max cover time {max}"))?;
    ensure(below as f64 <= 0.05 * times.len() as f64, format!("{below} of 200 below {}", c.cover_lower))?;
    Ok(format!("max {max:.3} < {:.2}, {below}/200 below {:.4}, median {:.3}", c.cover_upper, c.cover_lower, median(&times).unwrap()))
}

fn subcritical() -> Check {
    let spec = |n, c, oriented| {
        ExperimentSpec::new(Kind::Percolate, Params { n: Some(n), c: Some(c), oriented, ..Params::default() }, 10_000, 108)
    };
    let r16 = run(&spec(16, 0.5, false)).map_err(|e| e.to_string())?;
    let hits16 = r16.estimates["connection"]["successes"].as_u64().unwrap();
    ensure(hits16 == 0, format!("{hits16} unoriented connections at n = 16, c = 0.5"))?;
    let r20 = run(&spec(20, 2.0, true)).map_err(|e| e.to_string())?;
    let p20 = r20.estimates["connection"]["point"].as_f64().unwrap();
    let first = format!("n=16 c=0.5: 0/10000 (c^n = {:.2e})", 0.5f64.powi(16));
    if p20 < 0.01 {
        return Ok(format!("{first}; n=20 c=2 oriented: {p20} < 0.01"));
    }
    // Exact bracket at p = 0.1: (E N)^2 / E N^2 <= P(N > 0) <= E N.
    let table = overlap_table_dp(20).map_err(|e| e.to_string())?;
    let lower = second_moment_lower_bound(0.1, &table).map_err(|e| e.to_string())?;
    let upper = (ln_factorial(20) + 20.0 * 0.1f64.ln()).exp();
    ensure(lower > 0.01, format!("oriented estimate {p20} at n = 20, c = 2 and threshold not excluded by bounds"))?;
    let sigma = (upper * (1.0 - upper) / 10_000.0).sqrt();
    ensure(
        p20 >= lower - 3.0 * sigma && p20 <= upper + 3.0 * sigma,
        format!("oriented estimate {p20} outside exact bracket [{lower:.4}, {upper:.4}]"),
    )?;
    Ok(format!(
        "{UNATTAINABLE}{first}; n=20 c=2 oriented: {p20:.4}, but exact bounds give {lower:.4} <= P <= {upper:.4}, so < 0.01 cannot hold; estimate is inside the bracket"
    ))
}

fn btp_markov() -> Check {
    let hits: Vec<FirstHit> = (0..500).map(|r| first_hit_replicate(8, DEFAULT_CAP, 109, r).unwrap()).collect();
    let early = hits.iter().filter(|h| matches!(h, FirstHit::Hit(t) if *t <= 0.6)).count() as f64 / 500.0;
    let censored = hits.iter().filter(|h| h.is_censored()).count();
    let m1 = btp_mean_top(8, 0.6);
    let sigma = (m1 * (1.0 - m1) / 500.0).sqrt();
    ensure(early <= m1 + 3.0 * sigma, format!("P(tau <= 0.6) = {early} > {m1} + 3 sigma"))?;
    Ok(format!("P(tau <= 0.6) = {early} <= m1 = {m1:.4} + 3 sigma ({censored} censored)"))
}

fn cli_csv(bin: &Path, dir: &Path, name: &str, args: &[&str], jobs: &str) -> Result<Vec<u8>, String> {
    let csv = dir.join(format!("{name}-{jobs}.csv"));
    let status = Command::new(bin)
        .args(args)
        .args(["--jobs", jobs, "--out", dir.join("out.json").to_str().unwrap(), "--csv", csv.to_str().unwrap()])
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), format!("{name} exited with {status}"))?;
    std::fs::read(&csv).map_err(|e| e.to_string())
}

fn reproducibility() -> Check {
    let bin = Path::new(env!("CARGO_BIN_EXE_cubeperc"));
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [(&str, &[&str]); 10] = [
        ("percolate", &["percolate", "--n", "6", "--c", "3", "--oriented", "--reps", "300", "--seed", "5"]),
        ("ofpp", &["ofpp", "--n", "8", "--reps", "50", "--seed", "5"]),
        ("richardson", &["richardson", "--n", "6", "--t", "1.0", "--reps", "100", "--seed", "5"]),
        ("cover", &["cover", "--n", "6", "--reps", "50", "--seed", "5"]),
        ("btp", &["btp", "--n", "4", "--t", "0.5", "--reps", "100", "--seed", "5"]),
        ("btp-first-hit", &["btp", "--n", "5", "--first-hit", "--cap", "200", "--reps", "100", "--seed", "5"]),
        ("duality", &["duality", "--n", "5", "--t", "1.0", "--s", "0.4", "--reps", "100", "--seed", "5"]),
        ("conjecture", &["conjecture", "--n", "4", "--reps", "100", "--seed", "5"]),
        ("count", &["count", "--n", "9"]),
        ("analytic", &["analytic", "--what", "erlang", "--params", "n=5,u=0.5"]),
    ];
    for (name, args) in runs {
        let first = cli_csv(bin, dir.path(), name, args, "1")?;
        let second = cli_csv(bin, dir.path(), name, args, "3")?;
        ensure(first.len() > 20, format!("{name}: CSV suspiciously short"))?;
        ensure(first == second, format!("{name}: CSV differs between reruns"))?;
    }
    Ok("10 CLI experiments rerun with 1 and 3 workers: CSVs byte-identical".into())
}

fn main() {
    let results = [
        criterion(1, 1, extinction),
        criterion(2, 60, path_counts),
        criterion(3, 10, large_k_bound),
        criterion(4, 30, second_moment),
        criterion(5, 60, bijection),
        criterion(6, 1, erlang),
        criterion(7, 60, richardson_vs_fpp),
        criterion(8, 300, btp_moments),
        criterion(9, 300, duality),
        criterion(10, 600, ofpp),
        criterion(11, 600, cover),
        criterion(12, 300, subcritical),
        criterion(13, 300, btp_markov),
        criterion(14, 300, reproducibility),
    ];
    let count = |v: Verdict| results.iter().filter(|&&r| r == v).count();
    let (passed, failed, unattainable) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Unattainable));
    println!("acceptance: {passed}/{} passed, {failed} failed, {unattainable} unattainable as stated", results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
