//! Interval estimates and distribution comparisons used by the experiments.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial Monte Carlo estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Result<Self> {
        let (low, high) = wilson_interval(successes, trials, 0.95)?;
        Ok(McEstimate { successes, trials, point: successes as f64 / trials as f64, low, high, seed })
    }

    /// Binomial standard error `sqrt(p(1-p)/trials)` at the point estimate.
    pub fn std_err(&self) -> f64 {
        libm::sqrt(self.point * (1.0 - self.point) / self.trials as f64)
    }
}

/// Standard normal quantile (Acklam's rational approximation plus one
/// Halley refinement step; absolute error well below `1e-12`).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let plow = 0.02425;
    let x = if p < plow {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Wilson score interval at two-sided confidence `level`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    if successes > trials {
        return Err(Error::Range(format!("{successes} successes out of {trials} trials")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Range(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let z = normal_quantile(0.5 + level / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((low.min(p), high.max(p)))
}

/// Kolmogorov limiting tail `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} e^{-2 j² λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    let a = -2.0 * lambda * lambda;
    for j in 1..=200 {
        let jf = j as f64;
        let term = sign * libm::exp(a * jf * jf);
        sum += term;
        if libm::fabs(term) < 1e-17 * libm::fabs(sum) {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    // Series failed to settle (only for tiny λ, handled above).
    1.0
}

/// Two-sample Kolmogorov-Smirnov test: `(D, asymptotic p-value)`.
///
/// Uses the effective size `m n / (m + n)` with the Stephens small-sample
/// correction `λ = (√N_e + 0.12 + 0.11/√N_e) D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let d = sup_abs_cdf_diff(&xs, &ys);
    let ne = (xs.len() as f64 * ys.len() as f64) / (xs.len() + ys.len()) as f64;
    let sq = libm::sqrt(ne);
    let p = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    Ok((d, p))
}

/// Walks both sorted samples, stepping past ties together; returns
/// `(sup (F_a - F_b), sup (F_b - F_a))`.
fn cdf_excesses(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut up, mut down) = (0.0f64, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        let diff = i as f64 / na - j as f64 / nb;
        up = up.max(diff);
        down = down.max(-diff);
    }
    (up, down)
}

fn sup_abs_cdf_diff(a: &[f64], b: &[f64]) -> f64 {
    let (up, down) = cdf_excesses(a, b);
    up.max(down)
}

/// `sup_t (F̂_a(t) - F̂_b(t))` for sorted samples; nonnegative.
pub fn max_cdf_excess(a_sorted: &[f64], b_sorted: &[f64]) -> f64 {
    cdf_excesses(a_sorted, b_sorted).0
}

/// DKW half-width: `P(sup |F̂_m - F| > ε) ≤ α` for `ε = sqrt(ln(2/α) / 2m)`.
pub fn dkw_epsilon(m: usize, alpha: f64) -> f64 {
    libm::sqrt(libm::log(2.0 / alpha) / (2.0 * m as f64))
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, libm::sqrt(var / n)))
}

/// Quantile of a sample by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

pub fn median(xs: &[f64]) -> Result<f64> {
    quantile(xs, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use alloc::vec;
    use rand::Rng;

    fn exp_sample(rate: f64, m: usize, seed: u64, rep: u64) -> Vec<f64> {
        let mut rng = replicate_rng(seed, rep);
        (0..m).map(|_| -libm::log(1.0 - rng.gen::<f64>()) / rate).collect()
    }

    #[test]
    fn quantile_function() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!(normal_quantile(0.5).abs() < 1e-15);
        assert!((normal_quantile(0.001) + 3.090_232_306_167_813_5).abs() < 1e-10);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, 0.95).unwrap();
        let z2 = 1.959_963_984_540_054f64.powi(2);
        assert_eq!(lo, 0.0);
        assert!((hi - z2 / (100.0 + z2)).abs() < 1e-12);
        assert!((hi - 0.037).abs() < 5e-4);
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-15);
        assert_eq!(wilson_interval(100, 100, 0.95).unwrap().1, 1.0);
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(3, 2, 0.95).is_err());
        let (lo, hi) = wilson_interval(1, 1, 0.95).unwrap();
        assert!(lo > 0.0 && lo < 1.0 && hi == 1.0);
    }

    #[test]
    fn ks_identical() {
        let a = vec![0.3, 1.0, 2.5, 2.5, 4.0];
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
        assert!(ks_two_sample(&[], &a).is_err());
    }

    #[test]
    fn ks_statistic_by_hand() {
        // F_a jumps at 1,2,3; F_b at 2.5, 3.5. Largest gap 2/3 at t in [2, 2.5).
        let (d, _) = ks_two_sample(&[1.0, 2.0, 3.0], &[2.5, 3.5]).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_separates_rates() {
        let a = exp_sample(1.0, 10_000, 1, 0);
        let b = exp_sample(2.0, 10_000, 1, 1);
        let (_, p) = ks_two_sample(&a, &b).unwrap();
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn ks_null_calibration() {
        let trials = 200;
        let mut rejections = 0;
        for s in 0..trials {
            let a = exp_sample(1.0, 10_000, 100 + s, 0);
            let b = exp_sample(1.0, 10_000, 100 + s, 1);
            let (_, p) = ks_two_sample(&a, &b).unwrap();
            if p <= 0.001 {
                rejections += 1;
            }
        }
        // At most 1% of seeds may reject at the 0.001 level.
        assert!(rejections * 100 <= trials, "{rejections} rejections");
    }

    #[test]
    fn excess_and_dkw() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.5, 3.5];
        assert!((max_cdf_excess(&a, &b) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(max_cdf_excess(&b, &a), 0.0);
        assert!((dkw_epsilon(100, 0.05) - libm::sqrt(libm::log(40.0) / 200.0)).abs() < 1e-15);
    }

    #[test]
    fn summaries() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((se - libm::sqrt(5.0 / 3.0 / 4.0)).abs() < 1e-15);
        assert_eq!(median(&[5.0, 1.0, 3.0]).unwrap(), 3.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }
}
