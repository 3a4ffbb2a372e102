//! Overlap counting for monotone `0̂ → 1̂` paths.
//!
//! Fix the reference path `γ = (1, 2, ..., n)`. A second path `π` shares its
//! `i`-th edge with `γ` exactly when `{π(1..i-1)} = {1..i-1}` and `π(i) = i`.
//! The shared positions, padded with `0` and `n + 1`, form an
//! [`OverlapSeq`]; the gaps between them are blocks, and the labels inside a
//! block of size `s` form a breakpoint-free permutation of `s - 1` elements.
//! Since a one-element gap would itself be a shared edge, no block has size 2.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{for_each_permutation, PathPerm, Vertex};
use crate::error::{Error, Result};
use crate::math::{ln_factorial, log_add_exp};

/// Largest `n` for brute-force enumeration of all `n!` paths.
pub const BRUTE_FORCE_MAX_N: u32 = 8;
/// Largest `n` accepted by the composition recursion.
pub const DP_MAX_N: u32 = 60;

/// Breakpoint sequence `0 = r_0 < r_1 < ... < r_k < r_{k+1} = n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapSeq {
    n: u32,
    r: Vec<u32>,
}

impl OverlapSeq {
    /// Builds the sequence from the interior breakpoints `r_1 < ... < r_k`.
    pub fn new(n: u32, interior: &[u32]) -> Result<Self> {
        let mut r = Vec::with_capacity(interior.len() + 2);
        r.push(0);
        r.extend_from_slice(interior);
        r.push(n + 1);
        if r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfiguration(format!(
                "breakpoints {interior:?} not strictly increasing inside 1..={n}"
            )));
        }
        Ok(OverlapSeq { n, r })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of shared edges.
    pub fn k(&self) -> usize {
        self.r.len() - 2
    }

    /// The full sequence including `r_0` and `r_{k+1}`.
    pub fn r(&self) -> &[u32] {
        &self.r
    }

    /// Block sizes `s_i = r_{i+1} - r_i`, summing to `n + 1`.
    pub fn blocks(&self) -> impl Iterator<Item = u32> + '_ {
        self.r.windows(2).map(|w| w[1] - w[0])
    }
}

/// Shared-edge positions of a full path `p` of `B_n` against the identity path.
pub fn overlap_breakpoints(p: &PathPerm) -> Result<OverlapSeq> {
    let n = p.dim();
    if p.len() != n as usize {
        return Err(Error::InvalidPath(format!(
            "expected a permutation of 1..={n}, got {} labels",
            p.len()
        )));
    }
    let mut interior = Vec::new();
    let mut prefix_max = 0;
    for (idx, &label) in p.labels().iter().enumerate() {
        let i = idx as u32 + 1;
        // Labels are distinct, so the prefix is {1..i-1} iff its max is i-1.
        if label == i && prefix_max == i - 1 {
            interior.push(i);
        }
        prefix_max = prefix_max.max(label);
    }
    OverlapSeq::new(n, &interior)
}

fn shared_count(perm: &[u32]) -> usize {
    let mut k = 0;
    let mut prefix_max = 0;
    for (idx, &label) in perm.iter().enumerate() {
        let i = idx as u32 + 1;
        if label == i && prefix_max == i - 1 {
            k += 1;
        }
        prefix_max = prefix_max.max(label);
    }
    k
}

/// Exact `f(n, 0..=n)` with cumulative tails `F(n, k) = Σ_{l ≥ k} f(n, l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapTable {
    n: u32,
    counts: Vec<BigUint>,
    tails: Vec<BigUint>,
}

impl OverlapTable {
    pub fn from_counts(n: u32, counts: Vec<BigUint>) -> Self {
        assert_eq!(counts.len(), n as usize + 1);
        let mut tails = vec![BigUint::zero(); counts.len()];
        let mut acc = BigUint::zero();
        for k in (0..counts.len()).rev() {
            acc += &counts[k];
            tails[k] = acc.clone();
        }
        OverlapTable { n, counts, tails }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `f(n, k)`, zero beyond `n`.
    pub fn f(&self, k: usize) -> BigUint {
        self.counts.get(k).cloned().unwrap_or_default()
    }

    /// `F(n, k)`, zero beyond `n`.
    pub fn big_f(&self, k: usize) -> BigUint {
        self.tails.get(k).cloned().unwrap_or_default()
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn tails(&self) -> &[BigUint] {
        &self.tails
    }

    /// `ln F(n, k)`, `-inf` when the tail is empty.
    pub fn ln_big_f(&self, k: usize) -> f64 {
        ln_big(&self.big_f(k))
    }

    /// `F(n,k) / ((k+1)(n-k)!)`, the quantity whose limit is one for small `k`.
    pub fn small_k_ratio(&self, k: usize) -> f64 {
        libm::exp(self.ln_big_f(k) - bound_small_k(self.n, k as u32))
    }
}

pub(crate) fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        libm::log(x.to_f64().unwrap_or(f64::INFINITY))
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().unwrap_or(0.0);
        libm::log(top) + shift as f64 * core::f64::consts::LN_2
    }
}

/// `f(n, ·)` by enumerating all `n!` paths against the identity path.
pub fn overlap_table_bruteforce(n: u32) -> Result<OverlapTable> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Capacity { what: "brute-force overlap table dimension", limit: BRUTE_FORCE_MAX_N as u64 });
    }
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    let mut counts = vec![0u64; n as usize + 1];
    let mut labels: Vec<u32> = (1..=n).collect();
    for_each_permutation(&mut labels, |p| counts[shared_count(p)] += 1);
    Ok(OverlapTable::from_counts(n, counts.into_iter().map(BigUint::from).collect()))
}

/// Breakpoint-free permutation counts `a(0..=max)`.
///
/// `a(m)` counts permutations of `m` elements sharing no edge with the
/// identity. Every permutation of `m` elements either has none, or has a
/// first shared position `t`, giving `m! = a(m) + Σ_{t=1..m} a(t-1)(m-t)!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCount {
    a: Vec<BigUint>,
}

impl BlockCount {
    pub fn new(max: usize) -> Self {
        let fact = factorials(max);
        let mut a: Vec<BigUint> = Vec::with_capacity(max + 1);
        for m in 0..=max {
            let mut rest = BigUint::zero();
            for t in 1..=m {
                rest += &a[t - 1] * &fact[m - t];
            }
            a.push(&fact[m] - rest);
        }
        BlockCount { a }
    }

    pub fn get(&self, m: usize) -> &BigUint {
        &self.a[m]
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

pub(crate) fn factorials(max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = BigUint::one();
    out.push(acc.clone());
    for i in 1..=max {
        acc *= BigUint::from(i);
        out.push(acc.clone());
    }
    out
}

/// `f(n, ·)` by summing `Π a(s_i - 1)` over compositions of `n + 1`.
pub fn overlap_table_dp(n: u32) -> Result<OverlapTable> {
    if n > DP_MAX_N {
        return Err(Error::Capacity { what: "overlap table dimension", limit: DP_MAX_N as u64 });
    }
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    let total = n as usize + 1;
    let a = BlockCount::new(n as usize);
    // Admissible block sizes: s = 1, 3, 4, ..., n+1; a(1) = 0 rules out s = 2.
    let sizes: Vec<usize> = (1..=total).filter(|&s| s != 2).collect();
    // ways[m] = weighted count of j-block compositions of m, for the current j.
    let mut ways = vec![BigUint::zero(); total + 1];
    ways[0] = BigUint::one();
    let mut counts = Vec::with_capacity(total);
    for _blocks in 1..=total {
        let mut next = vec![BigUint::zero(); total + 1];
        for (m, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for &s in &sizes {
                if m + s > total {
                    break;
                }
                next[m + s] += w * a.get(s - 1);
            }
        }
        counts.push(next[total].clone());
        ways = next;
    }
    Ok(OverlapTable::from_counts(n, counts))
}

/// `ln((k+1)(n-k)!)`, the leading term of the small-`k` bound on `F(n,k)`.
///
/// The true bound carries a `1 + o(1)` factor, so this is only a reference
/// scale; compare with [`OverlapTable::small_k_ratio`].
pub fn bound_small_k(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    libm::log(k as f64 + 1.0) + ln_factorial((n - k) as u64)
}

/// `ln((n-k+1)(2 n^{7/8})^{n-k})`, valid for `k ≥ n - n^{3/4}/2`.
pub fn bound_large_k(n: u32, k: u32) -> Result<f64> {
    if k > n {
        return Err(Error::Range(format!("k = {k} exceeds n = {n}")));
    }
    let threshold = n as f64 - libm::pow(n as f64, 0.75) / 2.0;
    if (k as f64) < threshold {
        return Err(Error::Range(format!("k = {k} below n - n^(3/4)/2 = {threshold:.4}")));
    }
    let m = (n - k) as f64;
    Ok(libm::log(m + 1.0) + m * (core::f64::consts::LN_2 + 0.875 * libm::log(n as f64)))
}

/// Whether the middle-range bounds are backed by their hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MiddleKStatus {
    /// No `k` satisfies `k ≤ n - 5e(n+3)^{2/3}` (or `n < 25`): nothing is claimed.
    Vacuous,
    /// The bound on `f(n,k)` holds; the `F(n,k)` bound needs a larger `n`.
    FOnly,
    /// Both bounds hold.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiddleKBound {
    /// `ln(n^6 (n-k)!)`.
    pub ln_f_bound: f64,
    /// `ln(2 n^6 (n-k)! + c (2n^{7/8})^{c-1})` with `c = ⌈5e(n+3)^{2/3}⌉`.
    pub ln_big_f_bound: f64,
    pub status: MiddleKStatus,
}

fn middle_cutoff(n: u32) -> f64 {
    5.0 * core::f64::consts::E * libm::pow(n as f64 + 3.0, 2.0 / 3.0)
}

/// Middle-range bounds. The values are always evaluated; `status` says
/// whether the hypotheses hold. A `k` outside a nonempty admissible range is
/// a range error.
pub fn bound_middle_k(n: u32, k: u32) -> Result<MiddleKBound> {
    if k > n {
        return Err(Error::Range(format!("k = {k} exceeds n = {n}")));
    }
    let cutoff = middle_cutoff(n);
    let nf = n as f64;
    let ln_n = libm::log(nf);
    let ln_f_bound = 6.0 * ln_n + ln_factorial((n - k) as u64);
    let c = libm::ceil(cutoff);
    let tail = libm::log(c) + (c - 1.0) * (core::f64::consts::LN_2 + 0.875 * ln_n);
    let ln_big_f_bound = log_add_exp(core::f64::consts::LN_2 + ln_f_bound, tail);

    let range_empty = n < 25 || nf - cutoff < 0.0;
    let status = if range_empty {
        MiddleKStatus::Vacuous
    } else if (k as f64) > nf - cutoff {
        return Err(Error::Range(format!("k = {k} above n - 5e(n+3)^(2/3) = {:.4}", nf - cutoff)));
    } else if c <= libm::ceil(libm::pow(nf, 0.75) / 2.0) {
        MiddleKStatus::Both
    } else {
        MiddleKStatus::FOnly
    };
    Ok(MiddleKBound { ln_f_bound, ln_big_f_bound, status })
}

/// `G(r) = Π (s_i - 1)!`, counting paths whose shared set contains `r`.
pub fn g_weight(r: &OverlapSeq) -> BigUint {
    let fact = factorials(r.n() as usize + 1);
    r.blocks().map(|s| fact[s as usize - 1].clone()).product()
}

/// `G_1(r) = Π [(s_i - 1)! - 1 + δ_{1,s_i}]`.
pub fn g1_weight(r: &OverlapSeq) -> BigUint {
    let fact = factorials(r.n() as usize + 1);
    r.blocks()
        .map(|s| if s == 1 { BigUint::one() } else { &fact[s as usize - 1] - 1u32 })
        .product()
}

/// Outcome of checking the three factorial inequalities at one point.
/// `None` marks an item whose hypotheses do not hold for the arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorialFacts {
    /// `a! b! ≤ (a+j)! (b-j)!` for `a ≥ b ≥ j ≥ 0`.
    pub log_convex: Option<bool>,
    /// `(a!-1)((a+j)!-1) ≤ ((a-1)!-1)((a+j+1)!-1)` for `a ≥ 4`, or `a = 3, j ≥ 1`.
    pub shifted_product: Option<bool>,
    /// `(a!-1)/(b!-1) > a!/b! > (a/e)^{a-b}` for `a > b > 0`.
    pub ratio_chain: Option<bool>,
}

pub fn factorial_facts_check(a: u32, b: u32, j: u32) -> Result<FactorialFacts> {
    let top = (a + j + 1).max(b) as usize;
    let fact = factorials(top);
    let (au, bu, ju) = (a as usize, b as usize, j as usize);

    let log_convex = (a >= b && b >= j).then(|| &fact[au] * &fact[bu] <= &fact[au + ju] * &fact[bu - ju]);

    let shifted_product = (a >= 4 || (a == 3 && j >= 1)).then(|| {
        let lhs = (&fact[au] - 1u32) * (&fact[au + ju] - 1u32);
        let rhs = (&fact[au - 1] - 1u32) * (&fact[au + ju + 1] - 1u32);
        lhs <= rhs
    });

    let ratio_chain = (a > b && b > 0).then(|| {
        // (a!-1)/(b!-1) > a!/b!  <=>  (a!-1) b! > a! (b!-1); holds also when b! = 1.
        let first = (&fact[au] - 1u32) * &fact[bu] > &fact[au] * (&fact[bu] - 1u32);
        let ln_ratio = ln_factorial(a as u64) - ln_factorial(b as u64);
        let ln_power = (a - b) as f64 * (libm::log(a as f64) - 1.0);
        first && ln_ratio > ln_power
    });

    if log_convex.is_none() && shifted_product.is_none() && ratio_chain.is_none() {
        return Err(Error::Range(format!("(a, b, j) = ({a}, {b}, {j}) lies outside every hypothesis")));
    }
    Ok(FactorialFacts { log_convex, shifted_product, ratio_chain })
}

/// Endpoints of the two corner-to-corner path families in `B_{n+2L}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerPair {
    pub n: u32,
    pub pad: u32,
    pub x1: Vertex,
    pub x2: Vertex,
    pub y1: Vertex,
    pub y2: Vertex,
}

impl CornerPair {
    /// Checks `x_1 ≠ x_2` on level `L`, `y_1 ≠ y_2` on level `n + L`, `x_i ⊆ y_i`.
    pub fn new(n: u32, pad: u32, x1: Vertex, x2: Vertex, y1: Vertex, y2: Vertex) -> Result<Self> {
        let dim = n + 2 * pad;
        let bad = |msg: &str| Err(Error::InvalidConfiguration(msg.into()));
        if n == 0 || pad == 0 {
            return bad("need n ≥ 1 and L ≥ 1");
        }
        if [x1, x2, y1, y2].iter().any(|v| v.dim() != dim) {
            return Err(Error::InvalidConfiguration(format!("all corners must lie in B_{dim}")));
        }
        if x1.level() != pad || x2.level() != pad {
            return bad("x1, x2 must lie on level L");
        }
        if y1.level() != n + pad || y2.level() != n + pad {
            return bad("y1, y2 must lie on level n + L");
        }
        if x1 == x2 || y1 == y2 {
            return bad("corners must be distinct (x1 ≠ x2, y1 ≠ y2)");
        }
        if !x1.is_subset_of(y1) || !x2.is_subset_of(y2) {
            return bad("x_i must lie below y_i");
        }
        Ok(CornerPair { n, pad, x1, x2, y1, y2 })
    }

    pub fn dim(&self) -> u32 {
        self.n + 2 * self.pad
    }

    /// Reference path `γ`: the labels of `y_1 \ x_1` in increasing order.
    pub fn reference_path(&self) -> PathPerm {
        let labels = Vertex::new(self.y1.bits() & !self.x1.bits(), self.dim())
            .map(|v| v.labels())
            .unwrap_or_default();
        PathPerm::new(labels, self.dim()).expect("labels are distinct and in range")
    }
}

/// The bijection `h` from paths `x_1 → y_1` to paths `x_2 → y_2`.
///
/// Coordinates are first relabelled increasingly so that `x_1 = {1..L}`,
/// `y_1 = {1..n+L}` and the reference path is `(L+1, ..., L+n)`. In those
/// labels, `h(π)` keeps every `π(i)` that lies in `y_2 \ x_2`, and replaces
/// the `t`-th smallest label of `{L+1..L+n} \ (y_2 \ x_2)` by the `t`-th
/// smallest label of `(y_2 \ x_2) \ {L+1..L+n}`. The result is mapped back to
/// the original labels.
pub fn supplement_bijection(corners: &CornerPair, p: &PathPerm) -> Result<PathPerm> {
    let dim = corners.dim();
    let (n, pad) = (corners.n, corners.pad);
    let span1 = corners.y1.bits() & !corners.x1.bits();
    if p.dim() != dim || p.len() != n as usize || p.label_mask() != span1 {
        return Err(Error::InvalidPath("input must be a permutation of y1 \\ x1".into()));
    }

    // forward[label] = relabelled coordinate; backward is its inverse (both 1-based).
    let mut forward = vec![0u32; dim as usize + 1];
    let mut backward = vec![0u32; dim as usize + 1];
    let groups = [
        corners.x1.bits(),
        span1,
        !corners.y1.bits() & crate::cube::full_mask(dim),
    ];
    let mut next = 1;
    for group in groups {
        for j in 1..=dim {
            if group & (1 << (j - 1)) != 0 {
                forward[j as usize] = next;
                backward[next as usize] = j;
                next += 1;
            }
        }
    }

    let relabel_mask = |mask: u32| -> u32 {
        (1..=dim)
            .filter(|&j| mask & (1 << (j - 1)) != 0)
            .fold(0, |m, j| m | (1 << (forward[j as usize] - 1)))
    };
    let span2 = relabel_mask(corners.y2.bits() & !corners.x2.bits());
    let middle: u32 = ((1u32 << n) - 1) << pad; // labels L+1..L+n
    let dropped: Vec<u32> = (pad + 1..=pad + n).filter(|&j| span2 & (1 << (j - 1)) == 0).collect();
    let added: Vec<u32> = (1..=dim)
        .filter(|&j| span2 & (1 << (j - 1)) != 0 && middle & (1 << (j - 1)) == 0)
        .collect();
    debug_assert_eq!(dropped.len(), added.len());

    let image: Vec<u32> = p
        .labels()
        .iter()
        .map(|&orig| {
            let j = forward[orig as usize];
            let mapped = if span2 & (1 << (j - 1)) != 0 {
                j
            } else {
                let t = dropped.iter().position(|&d| d == j).expect("label outside y2 \\ x2 is dropped");
                added[t]
            };
            backward[mapped as usize]
        })
        .collect();
    PathPerm::new(image, dim)
}

/// Edges two paths have in common (as undirected vertex pairs).
pub fn shared_edges(a_start: Vertex, a: &PathPerm, b_start: Vertex, b: &PathPerm) -> Result<Vec<crate::cube::EdgeId>> {
    let ea = a.edges(a_start)?;
    let eb = b.edges(b_start)?;
    Ok(ea.into_iter().filter(|e| eb.contains(e)).collect())
}

/// Largest `n + 2L` accepted by [`f1_exact`].
pub const F1_MAX_DIM: u32 = 10;

/// `H(n, L, k, x_1, x_2, y_1, y_2)`: over all paths `γ` from `x_1` to `y_1`,
/// the maximum number of paths `x_2 → y_2` sharing at least `k` edges with `γ`.
pub fn f1_exact(corners: &CornerPair, k: u32) -> Result<u64> {
    if corners.dim() > F1_MAX_DIM {
        return Err(Error::Capacity { what: "f1_exact cube dimension n + 2L", limit: F1_MAX_DIM as u64 });
    }
    let n = corners.n as usize;
    if k as usize > n {
        return Ok(0);
    }
    let x2 = corners.x2.bits();
    let span2_labels = Vertex::new(corners.y2.bits() & !x2, corners.dim())?.labels();
    let mut gamma = corners.reference_path().labels().to_vec();

    // For each level L + i, γ has one edge: from gamma_lower[i] adding gamma_coord[i].
    let mut gamma_lower = vec![0u32; n];
    let mut gamma_bit = vec![0u32; n];
    // dp[subset of span2 (indexed locally)][shared so far, capped at k]
    let width = k as usize + 1;
    let mut dp = vec![0u64; (1usize << n) * width];
    let mut best = 0u64;

    for_each_permutation(&mut gamma, |g| {
        let mut cur = corners.x1.bits();
        for (i, &label) in g.iter().enumerate() {
            gamma_lower[i] = cur;
            gamma_bit[i] = 1 << (label - 1);
            cur |= gamma_bit[i];
        }
        dp.iter_mut().for_each(|x| *x = 0);
        dp[0] = 1;
        for subset in 0usize..(1 << n) {
            let level = subset.count_ones() as usize;
            if level == n {
                continue;
            }
            let mut vertex = x2;
            for (t, &label) in span2_labels.iter().enumerate() {
                if subset & (1 << t) != 0 {
                    vertex |= 1 << (label - 1);
                }
            }
            for shared in 0..width {
                let ways = dp[subset * width + shared];
                if ways == 0 {
                    continue;
                }
                for (t, &label) in span2_labels.iter().enumerate() {
                    if subset & (1 << t) != 0 {
                        continue;
                    }
                    let bit = 1u32 << (label - 1);
                    let hit = vertex == gamma_lower[level] && bit == gamma_bit[level];
                    let next_shared = (shared + hit as usize).min(k as usize);
                    dp[(subset | (1 << t)) * width + next_shared] += ways;
                }
            }
        }
        let full = (1usize << n) - 1;
        best = best.max(dp[full * width + k as usize]);
    });
    Ok(best)
}
