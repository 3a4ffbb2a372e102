//! Closed-form quantities: Poisson Galton-Watson extinction, Erlang tails and
//! the joint-tail scale `R(n,k)`, density comparison brackets, second-moment
//! ratios, the heat kernel and branching-process moments, and limit constants.
//!
//! Factorials and powers are evaluated in log space throughout.

use alloc::format;
use alloc::vec::Vec;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::OverlapTable;
use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::math::{adaptive_simpson, ln_binomial, ln_factorial};

/// Extinction probability of a Poisson(`c`) Galton-Watson tree and the
/// resulting limiting connection probability `(1 - x)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionResult {
    pub c: f64,
    pub x: f64,
    pub limit_prob: f64,
}

/// Smallest root of `x = e^{c(x-1)}` in `[0, 1]`.
///
/// For `c > 1` the root is bracketed in `[0, 1 - ln(c)/c]` (the right end is
/// where the map's slope is one, strictly left of the trivial root `x = 1`),
/// bisected to width `1e-9` and then polished by at most five Newton steps.
pub fn extinction_probability(c: f64) -> Result<ExtinctionResult> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("offspring mean must be positive and finite, got {c}")));
    }
    if c <= 1.0 {
        return Ok(ExtinctionResult { c, x: 1.0, limit_prob: 0.0 });
    }
    let h = |x: f64| libm::exp(c * (x - 1.0)) - x;
    let (mut lo, mut hi) = (0.0, 1.0 - libm::log(c) / c);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..5 {
        let slope = c * libm::exp(c * (x - 1.0)) - 1.0;
        let step = h(x) / slope;
        x -= step;
        if libm::fabs(step) < 1e-16 {
            break;
        }
    }
    let y = 1.0 - x;
    Ok(ExtinctionResult { c, x, limit_prob: y * y })
}

/// `P(S_n ≤ u)` for `S_n` a sum of `n` unit exponentials, i.e. `P(Poisson(u) ≥ n)`.
pub fn erlang_tail(n: u32, u: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if u <= 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    if u < nf + 1.0 {
        // Upper tail Σ_{m ≥ n}; terms decrease geometrically once m > u.
        let mut term = libm::exp(-u + nf * libm::log(u) - ln_factorial(n as u64));
        let mut sum = 0.0;
        let mut m = nf;
        loop {
            sum += term;
            m += 1.0;
            term *= u / m;
            if term <= sum * 1e-17 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        // 1 - Σ_{m < n}
        let mut term = libm::exp(-u);
        let mut head = 0.0;
        for m in 0..n {
            head += term;
            term *= u / (m as f64 + 1.0);
        }
        (1.0 - head).max(0.0)
    }
}

/// `K_1(u, n)` defined by `P(S_n ≤ u) = (1 + K_1) e^{-u} u^n / n!`.
pub fn erlang_k1(n: u32, u: f64) -> f64 {
    let lead = libm::exp(-u + n as f64 * libm::log(u) - ln_factorial(n as u64));
    erlang_tail(n, u) / lead - 1.0
}

/// `ln R(n,k)` with
/// `R(n,k) = 2^{2n-2k} e^{2n-k} (2n-k)^{-(2n-k)} / [(n-k)^{1/2} (2n-k)^{1/2}]`.
#[allow(non_snake_case)]
pub fn log_R(n: u32, k: u32) -> Result<f64> {
    if k < 1 || k + 1 > n {
        return Err(Error::Range(format!("need 1 ≤ k ≤ n - 1, got n = {n}, k = {k}")));
    }
    let m = (n - k) as f64;
    let d = (2 * n - k) as f64;
    Ok(2.0 * m * core::f64::consts::LN_2 + d - d * libm::log(d) - 0.5 * libm::log(m) - 0.5 * libm::log(d))
}

/// Default for the ratio constant in `R(n,k-1)/R(n,k) ≤ K_3/n`, fixed by a
/// numeric sweep over `n ≤ 200` (the largest observed `n·ratio` is below 4).
pub const DEFAULT_K3: f64 = 20.0;

/// The scale `C(2n-2k, n-k)/(2n-k)!` that brackets `P(S_n ≤ 1, S'_n ≤ 1)`
/// between `e^{-2}` and `9e^{-1}` times itself.
pub fn ln_joint_tail_scale(n: u32, k: u32) -> f64 {
    ln_binomial((2 * (n - k)) as u64, (n - k) as u64) - ln_factorial((2 * n - k) as u64)
}

/// Deviation quantities at one `(n, k, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBound {
    pub n: u32,
    pub k: u32,
    pub u: f64,
    pub log_r: f64,
    pub erlang_tail: f64,
    pub k1: f64,
    pub k3: f64,
}

pub fn deviation_bound(n: u32, k: u32, u: f64) -> Result<DeviationBound> {
    Ok(DeviationBound {
        n,
        k,
        u,
        log_r: log_R(n, k)?,
        erlang_tail: erlang_tail(n, u),
        k1: erlang_k1(n, u),
        k3: DEFAULT_K3,
    })
}

/// Bracket for `P(T_n ≤ u)` where `T_n` sums `n` variables with density `f`,
/// `f(0) = 1`, `|f(x) - 1| ≤ K_4 x`:
/// `[e^{-K_4 u} P(S_n ≤ u), e^{(1+K_4)u} P(S_n ≤ u)]`.
///
/// The upper end holds for every `n`; the lower end is a `liminf` statement.
pub fn lipschitz_tail_bounds(n: u32, u: f64, k4: f64) -> Result<(f64, f64)> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Range(format!("u must lie in (0, 1], got {u}")));
    }
    if !(k4 >= 0.0) {
        return Err(Error::Range(format!("K4 must be nonnegative, got {k4}")));
    }
    let base = erlang_tail(n, u);
    Ok((libm::exp(-k4 * u) * base, libm::exp((1.0 + k4) * u) * base))
}

/// `E N² / (E N)² = Σ_k f(n,k) p^{-k} / n!` for `N` the number of open
/// oriented `0̂ → 1̂` paths at edge probability `p`.
pub fn second_moment_ratio(p: f64, table: &OverlapTable) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Range(format!("p must lie in (0, 1], got {p}")));
    }
    let ln_nfact = ln_factorial(table.n() as u64);
    let ln_p = libm::log(p);
    let mut sum = 0.0;
    for (k, count) in table.counts().iter().enumerate() {
        let c = count.to_f64().unwrap_or(f64::INFINITY);
        if c == 0.0 {
            continue;
        }
        sum += libm::exp(libm::log(c) - ln_nfact - k as f64 * ln_p);
    }
    Ok(sum)
}

/// `(E N)² / E N² ≤ P(N > 0)`.
pub fn second_moment_lower_bound(p: f64, table: &OverlapTable) -> Result<f64> {
    Ok(1.0 / second_moment_ratio(p, table)?)
}

fn ln_heat_kernel_level(n: u32, level: u32, t: f64) -> f64 {
    let e = libm::exp(-2.0 * t);
    let away = -libm::expm1(-2.0 * t) / 2.0;
    let stay = (1.0 + e) / 2.0;
    let l = level as f64;
    let r = (n - level) as f64;
    let ln_away = if level == 0 { 0.0 } else { l * libm::log(away) };
    ln_away + r * libm::log(stay)
}

/// Probability that a rate-`n` simple random walk from `0̂` sits at a given
/// vertex of level `level` at time `t`.
pub fn heat_kernel_level(n: u32, level: u32, t: f64) -> f64 {
    libm::exp(ln_heat_kernel_level(n, level, t))
}

/// `p(x, t) = ((1 - e^{-2t})/2)^{|x|} ((1 + e^{-2t})/2)^{n-|x|}`.
pub fn heat_kernel(x: Vertex, t: f64) -> f64 {
    heat_kernel_level(x.dim(), x.level(), t)
}

/// Mean particle count at a level-`level` vertex: `m_1 = e^{nt} p(x, t)`.
pub fn btp_mean_level(n: u32, level: u32, t: f64) -> f64 {
    libm::exp(n as f64 * t + ln_heat_kernel_level(n, level, t))
}

pub fn btp_mean(x: Vertex, t: f64) -> f64 {
    btp_mean_level(x.dim(), x.level(), t)
}

/// `m_1(1̂, t) = sinh(t)^n`.
pub fn btp_mean_top(n: u32, t: f64) -> f64 {
    libm::pow(libm::sinh(t), n as f64)
}

/// First and second moments of the particle count at one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtpMoments {
    pub n: u32,
    pub t: f64,
    pub x: Vertex,
    pub p: f64,
    pub m1: f64,
    /// Only evaluated for `x = 1̂`.
    pub m2: Option<f64>,
}

pub fn btp_moments(x: Vertex, t: f64) -> Result<BtpMoments> {
    let n = x.dim();
    let m2 = if x.level() == n { Some(btp_second_moment(t, n)?) } else { None };
    Ok(BtpMoments { n, t, x, p: heat_kernel(x, t), m1: btp_mean(x, t), m2 })
}

/// Largest `n` for [`btp_second_moment`].
pub const BTP_SECOND_MOMENT_MAX_N: u32 = 10;

/// `E Z(1̂, t)²` from the ancestral-split decomposition
///
/// `m_2 = m_1(1̂,t) + 2 Σ_i ∫_0^t Σ_y m_1(y,s) m_1(1̂-y, t-s) m_1(1̂-y-e_i, t-s) ds`.
///
/// `m_1` depends on a vertex only through its level, so the sum over `y` and
/// `i` is carried out exactly by level: for `|y| = k`, flipping one of the `k`
/// coordinates in `y` raises `|1̂-y|` to `n-k+1`, flipping one of the other
/// `n-k` lowers it to `n-k-1`.
pub fn btp_second_moment(t: f64, n: u32) -> Result<f64> {
    if n > BTP_SECOND_MOMENT_MAX_N {
        return Err(Error::Capacity { what: "second-moment quadrature dimension", limit: BTP_SECOND_MOMENT_MAX_N as u64 });
    }
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Range(format!("t must be nonnegative, got {t}")));
    }
    let ln_binom: Vec<f64> = (0..=n).map(|k| ln_binomial(n as u64, k as u64)).collect();
    let integrand = |s: f64| -> f64 {
        let r = t - s;
        let mut acc = 0.0;
        for k in 0..=n {
            let weight = libm::exp(ln_binom[k as usize]) * btp_mean_level(n, k, s);
            if weight == 0.0 {
                continue;
            }
            let far = btp_mean_level(n, n - k, r);
            let mut pair = 0.0;
            if k > 0 {
                pair += k as f64 * btp_mean_level(n, n - k + 1, r);
            }
            if k < n {
                pair += (n - k) as f64 * btp_mean_level(n, n - k - 1, r);
            }
            acc += weight * far * pair;
        }
        acc
    };
    let integral = adaptive_simpson(integrand, 0.0, t, 1e-8, 40);
    Ok(btp_mean_top(n, t) + 2.0 * integral)
}

fn c_of_u(u: f64) -> f64 {
    let d = -libm::expm1(-2.0 * u);
    libm::exp(-4.0 * u) / (d * d)
}

/// `G(s, u) = ln[e^{-s}(1 + (e^{-4(u-s)} - e^{-4u}) / (1 - e^{-2u})²)]`, `0 ≤ s ≤ u`.
#[allow(non_snake_case)]
pub fn G_function(s: f64, u: f64) -> Result<f64> {
    if !(u > 0.0) || !(s >= 0.0 && s <= u) {
        return Err(Error::Range(format!("need 0 ≤ s ≤ u and u > 0, got s = {s}, u = {u}")));
    }
    let c = c_of_u(u);
    Ok(-s + libm::log1p(c * libm::expm1(4.0 * s)))
}

/// Closed-form `∂²G/∂s² = 16 c (1-c) e^{4s} / [1 + c(e^{4s} - 1)]²`.
pub fn g_second_derivative(s: f64, u: f64) -> Result<f64> {
    G_function(s, u)?;
    let c = c_of_u(u);
    let e = libm::exp(4.0 * s);
    let den = 1.0 + c * (e - 1.0);
    Ok(16.0 * c * (1.0 - c) * e / (den * den))
}

/// `ln(1 + √2)`, where `m_1(1̂, t) = 1` for every `n`.
pub fn btp_threshold() -> f64 {
    libm::log(1.0 + core::f64::consts::SQRT_2)
}

/// `V(ε) = -G(u, u)` at `u = ln(1 + √2) + ε`.
#[allow(non_snake_case)]
pub fn V_epsilon(eps: f64) -> Result<f64> {
    let u = btp_threshold() + eps;
    Ok(-G_function(u, u)?)
}

/// `θ_n ≤ c^n` for unoriented percolation at `p = c/n`, `0 < c < 1`.
pub fn subcritical_bound(n: u32, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Range(format!("bound needs 0 < c < 1, got {c}")));
    }
    Ok(libm::pow(c, n as f64))
}

/// Limit constants for first-passage and cover times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    /// `ln(1+√2) ≈ 0.8814`: lower limit for the unoriented time to `1̂`.
    pub btp_lower: f64,
    /// Upper limit for the time to `1̂` (the oriented first-passage limit).
    pub single_vertex_upper: f64,
    /// `2 ln(4 + 2√3) + 3 ≈ 7.02`.
    pub reach_constant: f64,
    /// `4 ln(4 + 2√3) + 6 ≈ 14.04`: cover-time upper limit.
    pub cover_upper: f64,
    /// `½ ln(2 + √5) + ln 2 ≈ 1.4149`: cover-time lower limit.
    pub cover_lower: f64,
}

impl TheoremConstants {
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("btp_lower", self.btp_lower),
            ("single_vertex_upper", self.single_vertex_upper),
            ("reach_constant", self.reach_constant),
            ("cover_upper", self.cover_upper),
            ("cover_lower", self.cover_lower),
        ]
    }
}

pub fn theorem_constants() -> TheoremConstants {
    let sqrt3 = libm::sqrt(3.0);
    let l = libm::log(4.0 + 2.0 * sqrt3);
    TheoremConstants {
        btp_lower: btp_threshold(),
        single_vertex_upper: 1.0,
        reach_constant: 2.0 * l + 3.0,
        cover_upper: 4.0 * l + 6.0,
        cover_lower: 0.5 * libm::log(2.0 + libm::sqrt(5.0)) + core::f64::consts::LN_2,
    }
}
