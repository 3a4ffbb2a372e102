//! Dispatch from an [`ExperimentSpec`] to the core library.

use std::time::Instant;

use cubeperc_core::analytic::{
    btp_mean_level, btp_mean_top, btp_second_moment, erlang_k1, erlang_tail, extinction_probability, log_R,
    subcritical_bound, theorem_constants, BTP_SECOND_MOMENT_MAX_N,
};
use cubeperc_core::btp::{btp_replicate, first_hit_replicate, BtpOutcome, FirstHit, DEFAULT_CAP};
use cubeperc_core::combinatorics::{overlap_table_bruteforce, overlap_table_dp};
use cubeperc_core::fpp::{
    conjecture_replicate, cover_replicate, duality_replicate, layer_excess, ofpp_first_moment_bound, ofpp_replicate,
    richardson_replicate, ConjectureReport, DualityEstimate, PassageDistribution,
};
use cubeperc_core::math::{ln_binomial, ln_factorial};
use cubeperc_core::percolation::{connection_replicate, edge_probability, exact_connection_probability, EXACT_MAX_N};
use cubeperc_core::rng::RNG_ID;
use cubeperc_core::stats::{mean_and_se, median, McEstimate};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{HarnessError, Result};
use crate::result::{finite, ExperimentResult, SCHEMA_VERSION};
use crate::spec::{ExperimentSpec, Kind, Params};

/// Most stored infection times the layer comparison may hold (`reps * 2^n`).
pub const CONJECTURE_MAX_CELLS: u64 = 1 << 25;

#[derive(Default)]
struct Outcome {
    samples: Option<Vec<Option<f64>>>,
    samples_right: Option<Vec<Option<f64>>>,
    censored: Vec<u64>,
    estimates: Value,
}

/// Runs one experiment on a pool of `spec.jobs` workers.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.jobs).build()?;
    let out = pool.install(|| dispatch(spec))?;
    Ok(ExperimentResult {
        schema: SCHEMA_VERSION,
        kind: spec.kind,
        params: spec.params.clone(),
        reps: spec.reps,
        seed: spec.seed,
        samples: out.samples,
        samples_right: out.samples_right,
        censored: out.censored,
        estimates: out.estimates,
        wall_time_s: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_ID.to_string(),
    })
}

/// Replicates `0..reps` in parallel, results in replicate order.
fn fan<T, F>(reps: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> cubeperc_core::Result<T> + Sync + Send,
{
    Ok((0..reps).into_par_iter().map(f).collect::<cubeperc_core::Result<Vec<T>>>()?)
}

fn dispatch(spec: &ExperimentSpec) -> Result<Outcome> {
    let p = &spec.params;
    match spec.kind {
        Kind::Percolate => percolate(p, spec.reps, spec.seed),
        Kind::Ofpp => ofpp(p, spec.reps, spec.seed),
        Kind::Richardson => richardson(p, spec.reps, spec.seed),
        Kind::Cover => cover(p, spec.reps, spec.seed),
        Kind::Btp if p.first_hit => btp_first_hit(p, spec.reps, spec.seed),
        Kind::Btp => btp(p, spec.reps, spec.seed),
        Kind::Duality => duality(p, spec.reps, spec.seed),
        Kind::Conjecture => conjecture(p, spec.reps, spec.seed),
        Kind::Count => count(p),
        Kind::Analytic => analytic(p),
    }
}

fn indicator(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

fn summary(xs: &[f64]) -> Result<Value> {
    let (mean, se) = mean_and_se(xs)?;
    Ok(json!({
        "mean": mean,
        "std_err": se,
        "median": median(xs)?,
        "min": xs.iter().copied().fold(f64::INFINITY, f64::min),
        "max": xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }))
}

fn estimate(successes: u64, reps: u64, seed: u64) -> Result<Value> {
    let est = McEstimate::from_counts(successes, reps, seed)?;
    let mut v = serde_json::to_value(est)?;
    v["std_err"] = json!(est.std_err());
    Ok(v)
}

fn percolate(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let c = match (p.c, p.p) {
        (Some(c), None) => c,
        (None, Some(prob)) => prob * n as f64,
        (Some(_), Some(_)) => return Err(HarnessError::Invalid("give --c or --p, not both".into())),
        (None, None) => return Err(HarnessError::Invalid("--c or --p is required".into())),
    };
    let prob = edge_probability(n, c)?;
    let hits = fan(reps, |i| connection_replicate(n, c, p.oriented, seed, i))?;
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let exact = if n <= EXACT_MAX_N { Some(exact_connection_probability(n, prob, p.oriented)?) } else { None };
    let x = extinction_probability(c)?;
    let limit = if p.oriented && c < std::f64::consts::E { 0.0 } else { x.limit_prob };
    Ok(Outcome {
        samples: Some(hits.into_iter().map(indicator).collect()),
        estimates: json!({
            "p": prob,
            "connection": estimate(successes, reps, seed)?,
            "exact": exact,
            "limit": limit,
            "subcritical_bound": if c < 1.0 { subcritical_bound(n, c).ok() } else { None },
        }),
        ..Outcome::default()
    })
}

fn ofpp(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let eps = p.eps.unwrap_or(0.2);
    let bound = ofpp_first_moment_bound(n, eps, 0.0)?;
    let times = fan(reps, |i| ofpp_replicate(n, PassageDistribution::Exponential, seed, i))?;
    let below = times.iter().filter(|&&t| t <= 1.0 - eps).count() as u64;
    Ok(Outcome {
        samples: Some(times.iter().copied().map(finite).collect()),
        estimates: json!({
            "time": summary(&times)?,
            "eps": eps,
            "below_one_minus_eps": estimate(below, reps, seed)?,
            "first_moment_bound": bound,
            "limit": 1.0,
        }),
        ..Outcome::default()
    })
}

fn richardson(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let horizon = p.t.unwrap_or(f64::INFINITY);
    let times = fan(reps, |i| Ok(richardson_replicate(n, horizon, seed, i)?.antipode_time()))?;
    let hit = times.iter().filter(|t| t.is_finite()).count() as u64;
    let consts = theorem_constants();
    let mut est = json!({
        "top_infected_by_horizon": estimate(hit, reps, seed)?,
        "lower_limit": consts.btp_lower,
        "upper_limit": consts.single_vertex_upper,
    });
    if hit == reps {
        est["top_time"] = summary(&times)?;
    }
    Ok(Outcome { samples: Some(times.iter().copied().map(finite).collect()), estimates: est, ..Outcome::default() })
}

fn cover(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let times = fan(reps, |i| cover_replicate(n, seed, i))?;
    let consts = theorem_constants();
    let above = times.iter().filter(|&&t| t >= consts.cover_upper).count() as u64;
    let below = times.iter().filter(|&&t| t < consts.cover_lower).count() as u64;
    Ok(Outcome {
        samples: Some(times.iter().copied().map(finite).collect()),
        estimates: json!({
            "cover_time": summary(&times)?,
            "upper_limit": consts.cover_upper,
            "lower_limit": consts.cover_lower,
            "at_or_above_upper": estimate(above, reps, seed)?,
            "below_lower": estimate(below, reps, seed)?,
        }),
        ..Outcome::default()
    })
}

fn btp(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let t = p.require_t()?;
    let cap = p.cap.unwrap_or(DEFAULT_CAP);
    let runs = fan(reps, |i| btp_replicate(n, t, cap, seed, i))?;
    let mut censored = Vec::new();
    let mut samples = Vec::with_capacity(runs.len());
    let mut totals = Vec::new();
    let mut tops = Vec::new();
    let mut top_sq = Vec::new();
    let mut level_sums = vec![Vec::new(); n as usize + 1];
    let top = (1usize << n) - 1;
    for (i, run) in runs.iter().enumerate() {
        match run {
            BtpOutcome::Snapshot(pop) => {
                let z = pop.counts()[top] as f64;
                samples.push(Some(z));
                totals.push(pop.total() as f64);
                tops.push(z);
                top_sq.push(z * z);
                let mut sums = vec![0.0; n as usize + 1];
                for (x, &count) in pop.counts().iter().enumerate() {
                    sums[x.count_ones() as usize] += count as f64;
                }
                for (k, s) in sums.into_iter().enumerate() {
                    level_sums[k].push(s);
                }
            }
            BtpOutcome::Overflow { .. } => {
                samples.push(None);
                censored.push(i as u64);
            }
        }
    }
    let mut est = json!({
        "cap": cap,
        "overflows": censored.len(),
        "yule_mean": (n as f64 * t).exp(),
        "m1_top": btp_mean_top(n, t),
        "m2_top": if n <= BTP_SECOND_MOMENT_MAX_N { Some(btp_second_moment(t, n)?) } else { None },
    });
    if !totals.is_empty() {
        let (mt, st) = mean_and_se(&totals)?;
        let (mz, sz) = mean_and_se(&tops)?;
        let (mq, sq) = mean_and_se(&top_sq)?;
        let levels: Vec<Value> = level_sums
            .iter()
            .enumerate()
            .map(|(k, sums)| {
                // Per-vertex mean at level k: level total over C(n,k).
                let width = ln_binomial(n as u64, k as u64).exp();
                let (m, s) = mean_and_se(sums).unwrap_or((f64::NAN, f64::NAN));
                json!({"level": k, "mean": m / width, "std_err": s / width, "analytic": btp_mean_level(n, k as u32, t)})
            })
            .collect();
        est["total"] = json!({"mean": mt, "std_err": st});
        est["top"] = json!({"mean": mz, "std_err": sz});
        est["top_squared"] = json!({"mean": mq, "std_err": sq});
        est["levels"] = json!(levels);
    }
    Ok(Outcome { samples: Some(samples), censored, estimates: est, ..Outcome::default() })
}

fn btp_first_hit(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let cap = p.cap.unwrap_or(DEFAULT_CAP);
    let hits = fan(reps, |i| first_hit_replicate(n, cap, seed, i))?;
    let times: Vec<f64> = hits.iter().map(|h| h.time()).collect();
    let censored: Vec<u64> = hits.iter().enumerate().filter(|(_, h)| h.is_censored()).map(|(i, _)| i as u64).collect();
    let mut est = json!({
        "cap": cap,
        "censored": censored.len(),
        // Censored times are lower bounds, so this is a lower bound on the median.
        "median": median(&times)?,
        "limit": theorem_constants().btp_lower,
    });
    if let Some(t) = p.t {
        let below = hits.iter().filter(|h| matches!(h, FirstHit::Hit(x) if *x <= t)).count() as u64;
        est["hit_by_t"] = estimate(below, reps, seed)?;
        est["markov_bound"] = json!(btp_mean_top(n, t));
    }
    Ok(Outcome { samples: Some(times.into_iter().map(finite).collect()), censored, estimates: est, ..Outcome::default() })
}

fn duality(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    let t = p.require_t()?;
    let s = p.s.ok_or_else(|| HarnessError::Invalid("--s is required".into()))?;
    let pairs = fan(reps, |i| duality_replicate(n, t, s, seed, i))?;
    let left = pairs.iter().filter(|x| x.0).count() as u64;
    let right = pairs.iter().filter(|x| x.1).count() as u64;
    let est = DualityEstimate::from_counts(n, t, s, left, right, reps, seed)?;
    let mut v = serde_json::to_value(est)?;
    v["z_score"] = json!(finite(est.z_score()));
    Ok(Outcome {
        samples: Some(pairs.iter().map(|x| indicator(x.0)).collect()),
        samples_right: Some(pairs.iter().map(|x| indicator(x.1)).collect()),
        estimates: v,
        ..Outcome::default()
    })
}

fn conjecture(p: &Params, reps: u64, seed: u64) -> Result<Outcome> {
    let n = p.require_n()?;
    if n < 32 && reps.saturating_mul(1u64 << n) > CONJECTURE_MAX_CELLS {
        return Err(cubeperc_core::Error::Capacity { what: "stored infection times (reps * 2^n)", limit: CONJECTURE_MAX_CELLS }.into());
    }
    let runs = fan(reps, |i| conjecture_replicate(n, seed, i))?;
    let report = ConjectureReport::from_samples(n, &runs, seed)?;
    let flagged = report.flagged().count();
    let mut v = serde_json::to_value(&report)?;
    v["flagged"] = json!(flagged);
    Ok(Outcome {
        samples: Some(runs.iter().map(|times| finite(layer_excess(n, times))).collect()),
        estimates: v,
        ..Outcome::default()
    })
}

fn count(p: &Params) -> Result<Outcome> {
    let n = p.require_n()?;
    let table = match p.method.as_deref().unwrap_or("dp") {
        "dp" => overlap_table_dp(n)?,
        "brute" => overlap_table_bruteforce(n)?,
        other => return Err(HarnessError::Invalid(format!("unknown --method '{other}' (expected dp or brute)"))),
    };
    let f: Vec<String> = table.counts().iter().map(|x| x.to_string()).collect();
    let big_f: Vec<String> = table.tails().iter().map(|x| x.to_string()).collect();
    Ok(Outcome { estimates: json!({"n": n, "f": f, "F": big_f}), ..Outcome::default() })
}

fn arg(p: &Params, name: &str, fallback: Option<f64>) -> Result<f64> {
    p.extra
        .get(name)
        .copied()
        .or(fallback)
        .ok_or_else(|| HarnessError::Invalid(format!("analytic parameter '{name}' is required")))
}

fn whole(x: f64, name: &str) -> Result<u32> {
    if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
        Ok(x as u32)
    } else {
        Err(HarnessError::Invalid(format!("'{name}' must be a nonnegative integer, got {x}")))
    }
}

fn analytic(p: &Params) -> Result<Outcome> {
    let what = p.what.as_deref().ok_or_else(|| HarnessError::Invalid("--what is required".into()))?;
    let n_arg = || -> Result<u32> { whole(arg(p, "n", p.n.map(f64::from))?, "n") };
    let estimates = match what {
        "extinction" => {
            let r = extinction_probability(arg(p, "c", p.c)?)?;
            json!({"c": r.c, "x": r.x, "limit_prob": r.limit_prob})
        }
        "constants" => {
            let map: serde_json::Map<String, Value> =
                theorem_constants().entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            Value::Object(map)
        }
        "erlang" => {
            let n = n_arg()?;
            let u = arg(p, "u", p.t)?;
            let lower = (-u + n as f64 * u.ln() - ln_factorial(n as u64)).exp();
            json!({
                "n": n,
                "u": u,
                "tail": erlang_tail(n, u),
                "k1": erlang_k1(n, u),
                "lower": lower,
                "upper": (1.0 + std::f64::consts::E / (n as f64 + 1.0)) * lower,
            })
        }
        "R" => {
            let n = n_arg()?;
            let k = whole(arg(p, "k", None)?, "k")?;
            let ln_r = log_R(n, k)?;
            json!({"n": n, "k": k, "ln_R": ln_r, "R": ln_r.exp()})
        }
        "ofpp-bound" => {
            let n = n_arg()?;
            let eps = arg(p, "eps", p.eps)?;
            let k4 = arg(p, "k4", Some(0.0))?;
            json!({"n": n, "eps": eps, "k4": k4, "bound": ofpp_first_moment_bound(n, eps, k4)?})
        }
        "btp-moments" => {
            let n = n_arg()?;
            let t = arg(p, "t", p.t)?;
            let m2 = if n <= BTP_SECOND_MOMENT_MAX_N { Some(btp_second_moment(t, n)?) } else { None };
            json!({"n": n, "t": t, "m1_top": btp_mean_top(n, t), "m2_top": m2, "yule_mean": (n as f64 * t).exp()})
        }
        other => {
            return Err(HarnessError::Invalid(format!(
                "unknown --what '{other}' (expected extinction, constants, erlang, R, ofpp-bound or btp-moments)"
            )))
        }
    };
    Ok(Outcome { estimates, ..Outcome::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: Kind, params: Params, reps: u64) -> ExperimentSpec {
        ExperimentSpec::new(kind, params, reps, 3)
    }

    #[test]
    fn count_small() {
        let r = run(&spec(Kind::Count, Params { n: Some(3), ..Params::default() }, 1)).unwrap();
        assert_eq!(r.estimates["f"], json!(["3", "2", "0", "1"]));
        assert_eq!(r.estimates["F"], json!(["6", "3", "1", "1"]));
    }

    #[test]
    fn single_replicate() {
        let r = run(&spec(Kind::Percolate, Params { n: Some(3), c: Some(1.5), ..Params::default() }, 1)).unwrap();
        assert_eq!(r.samples.unwrap().len(), 1);
        let low = r.estimates["connection"]["low"].as_f64().unwrap();
        let high = r.estimates["connection"]["high"].as_f64().unwrap();
        assert!((0.0..=high).contains(&low) && high <= 1.0);
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let big = spec(Kind::Ofpp, Params { n: Some(40), ..Params::default() }, 1);
        assert_eq!(run(&big).unwrap_err().exit_code(), 2);
        let bad = spec(Kind::Percolate, Params { n: Some(3), c: Some(9.0), ..Params::default() }, 1);
        assert_eq!(run(&bad).unwrap_err().exit_code(), 3);
        let missing = spec(Kind::Duality, Params { n: Some(3), t: Some(1.0), ..Params::default() }, 1);
        assert_eq!(run(&missing).unwrap_err().exit_code(), 3);
        let huge = spec(Kind::Conjecture, Params { n: Some(14), ..Params::default() }, 10_000);
        assert_eq!(run(&huge).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn analytic_kinds() {
        let mut p = Params { what: Some("extinction".into()), c: Some(std::f64::consts::E), ..Params::default() };
        let r = run(&spec(Kind::Analytic, p.clone(), 1)).unwrap();
        assert!((r.estimates["limit_prob"].as_f64().unwrap() - 0.8416).abs() < 5e-4);
        p.what = Some("erlang".into());
        p.extra = Params::parse_extra("n=5,u=0.5").unwrap();
        let r = run(&spec(Kind::Analytic, p.clone(), 1)).unwrap();
        let e = &r.estimates;
        assert!(e["lower"].as_f64() <= e["tail"].as_f64() && e["tail"].as_f64() <= e["upper"].as_f64());
        p.what = Some("bogus".into());
        assert_eq!(run(&spec(Kind::Analytic, p, 1)).unwrap_err().exit_code(), 3);
    }
}
