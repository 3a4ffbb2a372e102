//! First-passage percolation on `B_n` and Richardson's growth model.
//!
//! Passage times are i.i.d. positive weights on the edges. The oriented
//! percolation time is the lightest monotone `0̂ → 1̂` path. Unoriented
//! infection times are single-source shortest-path distances. With unit
//! exponential weights the latter have the law of Richardson's model, which
//! is also simulated directly as a jump process.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::analytic::erlang_k1;
use crate::cube::{edge_index, full_mask, EdgeId, Vertex};
use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::rng::{replicate_rng, stream};
use crate::stats::{dkw_epsilon, max_cdf_excess, mean_and_se, McEstimate};

/// Largest dimension for the oriented level-order pass.
pub const OFPP_MAX_N: u32 = 26;
/// Largest dimension for shortest-path times and Richardson simulation.
pub const INFECTION_MAX_N: u32 = 22;
/// Largest dimension for the layer-monotonicity experiment.
pub const CONJECTURE_MAX_N: u32 = 14;

fn check_dim(n: u32, limit: u32, what: &'static str) -> Result<()> {
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    if n > limit {
        return Err(Error::Capacity { what, limit: limit as u64 });
    }
    Ok(())
}

/// Law of a single passage time.
#[derive(Debug, Clone, Copy, Default)]
pub enum PassageDistribution {
    /// Unit exponential, the Richardson case.
    #[default]
    Exponential,
    /// Any positive law given by its quantile function, with the density
    /// comparison constant `K4` declared by the caller.
    InverseCdf { quantile: fn(f64) -> f64, k4: f64 },
}

impl PassageDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PassageDistribution::Exponential => Exp1.sample(rng),
            PassageDistribution::InverseCdf { quantile, .. } => quantile(rng.gen::<f64>()),
        }
    }

    pub fn k4(&self) -> f64 {
        match self {
            PassageDistribution::Exponential => 0.0,
            PassageDistribution::InverseCdf { k4, .. } => *k4,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            PassageDistribution::Exponential => "exponential(1)",
            PassageDistribution::InverseCdf { .. } => "inverse-cdf",
        }
    }
}


/// Source of edge weights, addressed by lower endpoint and 0-based bit.
pub trait EdgeWeights {
    fn dim(&self) -> u32;
    fn weight(&mut self, lower: u32, bit: u32) -> f64;
}

/// Every edge weight drawn up front and kept.
#[derive(Debug, Clone)]
pub struct WeightAssignment {
    n: u32,
    oriented: bool,
    distribution: PassageDistribution,
    weights: Vec<f64>,
}

impl WeightAssignment {
    /// One draw per edge, lower endpoint ascending then coordinate ascending.
    pub fn sample<R: Rng + ?Sized>(n: u32, oriented: bool, distribution: PassageDistribution, rng: &mut R) -> Result<Self> {
        check_dim(n, OFPP_MAX_N, "weight table dimension")?;
        let mut weights = vec![f64::NAN; (n as usize) << n];
        for v in 0..(1u32 << n) {
            for bit in 0..n {
                if v & (1 << bit) == 0 {
                    let w = distribution.sample(rng);
                    if !(w > 0.0) {
                        return Err(Error::Domain(format!("passage time must be positive, drew {w}")));
                    }
                    weights[edge_index(n, v, bit)] = w;
                }
            }
        }
        Ok(WeightAssignment { n, oriented, distribution, weights })
    }

    /// Every edge gets weight `w`.
    pub fn constant(n: u32, oriented: bool, w: f64) -> Result<Self> {
        check_dim(n, OFPP_MAX_N, "weight table dimension")?;
        if !(w > 0.0) {
            return Err(Error::Domain(format!("passage time must be positive, got {w}")));
        }
        let mut weights = vec![f64::NAN; (n as usize) << n];
        for v in 0..(1u32 << n) {
            for bit in 0..n {
                if v & (1 << bit) == 0 {
                    weights[edge_index(n, v, bit)] = w;
                }
            }
        }
        Ok(WeightAssignment { n, oriented, distribution: PassageDistribution::Exponential, weights })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn oriented(&self) -> bool {
        self.oriented
    }

    pub fn distribution(&self) -> PassageDistribution {
        self.distribution
    }

    /// Same weights read with the other orientation.
    pub fn with_orientation(mut self, oriented: bool) -> Self {
        self.oriented = oriented;
        self
    }

    pub fn get(&self, edge: EdgeId) -> f64 {
        self.weights[edge.table_index()]
    }

    pub fn set(&mut self, edge: EdgeId, w: f64) -> Result<()> {
        if !(w > 0.0) {
            return Err(Error::Domain(format!("passage time must be positive, got {w}")));
        }
        if edge.lower().dim() != self.n {
            return Err(Error::InvalidVertex("edge from a different cube".into()));
        }
        self.weights[edge.table_index()] = w;
        Ok(())
    }

    /// Weight between adjacent masks, either order.
    pub fn between(&self, v: u32, w: u32) -> f64 {
        let lower = v.min(w);
        let bit = (v ^ w).trailing_zeros();
        self.weights[edge_index(self.n, lower, bit)]
    }
}

impl EdgeWeights for WeightAssignment {
    fn dim(&self) -> u32 {
        self.n
    }

    fn weight(&mut self, lower: u32, bit: u32) -> f64 {
        self.weights[edge_index(self.n, lower, bit)]
    }
}

/// Fresh weight on every query.
///
/// Correct only for algorithms that look at each edge at most once; both
/// [`oriented_fpp_time`] and [`infection_times_from`] do.
pub struct LazyWeights<'a, R: Rng + ?Sized> {
    n: u32,
    distribution: PassageDistribution,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> LazyWeights<'a, R> {
    pub fn new(n: u32, distribution: PassageDistribution, rng: &'a mut R) -> Self {
        LazyWeights { n, distribution, rng }
    }
}

impl<R: Rng + ?Sized> EdgeWeights for LazyWeights<'_, R> {
    fn dim(&self) -> u32 {
        self.n
    }

    fn weight(&mut self, _lower: u32, _bit: u32) -> f64 {
        self.distribution.sample(self.rng)
    }
}

/// Lightest monotone `0̂ → 1̂` path.
pub fn oriented_fpp_time<W: EdgeWeights + ?Sized>(weights: &mut W) -> Result<f64> {
    let n = weights.dim();
    check_dim(n, OFPP_MAX_N, "oriented first-passage dimension")?;
    let size = 1usize << n;
    let mut t = vec![0.0f64; size];
    for v in 1..size as u32 {
        let mut best = f64::INFINITY;
        let mut rest = v;
        while rest != 0 {
            let bit = rest.trailing_zeros();
            rest &= rest - 1;
            let w = v ^ (1 << bit);
            let cand = t[w as usize] + weights.weight(w, bit);
            if cand < best {
                best = cand;
            }
        }
        t[v as usize] = best;
    }
    Ok(t[size - 1])
}

/// Infection time of every vertex from one source; `f64::INFINITY` marks a
/// vertex never infected.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionTimes {
    n: u32,
    source: u32,
    times: Vec<f64>,
}

impl InfectionTimes {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn source(&self) -> Vertex {
        Vertex::new(self.source, self.n).expect("source inside the cube")
    }

    /// Indexed by vertex mask.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, v: Vertex) -> f64 {
        self.times[v.bits() as usize]
    }

    /// Time at the vertex opposite the source.
    pub fn antipode_time(&self) -> f64 {
        self.times[(self.source ^ full_mask(self.n)) as usize]
    }

    /// `A(t)` as a sorted list of masks.
    pub fn infected_by(&self, t: f64) -> Vec<u32> {
        (0..self.times.len() as u32).filter(|&v| self.times[v as usize] <= t).collect()
    }

    pub fn infected_count(&self, t: f64) -> usize {
        self.times.iter().filter(|&&x| x <= t).count()
    }

    /// Largest deviation from `T(v) = min_w T(w) + X_{wv}` over `v ≠ source`
    /// among finite times, together with `|T(source)|`.
    pub fn bellman_residual(&self, weights: &WeightAssignment) -> f64 {
        let mut worst = libm::fabs(self.times[self.source as usize]);
        for v in 0..self.times.len() as u32 {
            if v == self.source || !self.times[v as usize].is_finite() {
                continue;
            }
            let mut best = f64::INFINITY;
            for bit in 0..self.n {
                let w = v ^ (1 << bit);
                let cand = self.times[w as usize] + weights.between(v, w);
                if cand < best {
                    best = cand;
                }
            }
            worst = worst.max(libm::fabs(self.times[v as usize] - best));
        }
        worst
    }

    /// Every infected vertex other than the source has a neighbour infected
    /// no later, so each `A(t)` is connected.
    pub fn growth_is_connected(&self) -> bool {
        (0..self.times.len() as u32).all(|v| {
            let tv = self.times[v as usize];
            v == self.source || !tv.is_finite() || (0..self.n).any(|b| self.times[(v ^ (1 << b)) as usize] <= tv)
        })
    }
}

/// First time every vertex is infected.
pub fn cover_time(times: &InfectionTimes) -> Result<f64> {
    let uninfected = times.times.iter().filter(|x| !x.is_finite()).count();
    if uninfected > 0 {
        return Err(Error::IncompleteCoverage { uninfected });
    }
    Ok(times.times.iter().copied().fold(0.0, f64::max))
}

#[derive(PartialEq)]
struct Entry {
    t: f64,
    v: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on time, ties by vertex for a fixed settle order
        other.t.total_cmp(&self.t).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Unoriented shortest-path times from `source`.
pub fn infection_times_from<W: EdgeWeights + ?Sized>(source: Vertex, weights: &mut W) -> Result<InfectionTimes> {
    let n = weights.dim();
    check_dim(n, INFECTION_MAX_N, "infection-time dimension")?;
    if source.dim() != n {
        return Err(Error::InvalidVertex("source from a different cube".into()));
    }
    let size = 1usize << n;
    let mut times = vec![f64::INFINITY; size];
    let mut settled = vec![false; size];
    let mut heap = BinaryHeap::new();
    times[source.bits() as usize] = 0.0;
    heap.push(Entry { t: 0.0, v: source.bits() });
    while let Some(Entry { t, v }) = heap.pop() {
        if settled[v as usize] {
            continue;
        }
        settled[v as usize] = true;
        for bit in 0..n {
            let w = v ^ (1 << bit);
            if settled[w as usize] {
                continue;
            }
            let cand = t + weights.weight(v.min(w), bit);
            if cand < times[w as usize] {
                times[w as usize] = cand;
                heap.push(Entry { t: cand, v: w });
            }
        }
    }
    Ok(InfectionTimes { n, source: source.bits(), times })
}

/// [`infection_times_from`] with source `0̂`.
pub fn unoriented_infection_times<W: EdgeWeights + ?Sized>(weights: &mut W) -> Result<InfectionTimes> {
    let n = weights.dim();
    infection_times_from(Vertex::bottom(n)?, weights)
}

/// Richardson's model from `source` up to `horizon`.
///
/// Each step waits `Exp(boundary edges)` and then infects an uninfected
/// vertex chosen with probability proportional to its infected neighbours.
/// Vertices still healthy at `horizon` get `f64::INFINITY`.
pub fn richardson_simulate<R: Rng + ?Sized>(source: Vertex, horizon: f64, rng: &mut R) -> Result<InfectionTimes> {
    let n = source.dim();
    check_dim(n, INFECTION_MAX_N, "Richardson dimension")?;
    if horizon.is_nan() || horizon < 0.0 {
        return Err(Error::Range(format!("horizon must be nonnegative, got {horizon}")));
    }
    let size = 1usize << n;
    let mut times = vec![f64::INFINITY; size];
    let mut boundary = Fenwick::new(size);
    let infect = |v: u32, t: f64, times: &mut Vec<f64>, boundary: &mut Fenwick| {
        times[v as usize] = t;
        let w = boundary.weight(v as usize);
        if w > 0 {
            boundary.sub(v as usize, w);
        }
        for bit in 0..n {
            let u = v ^ (1 << bit);
            if !times[u as usize].is_finite() {
                boundary.add(u as usize, 1);
            }
        }
    };
    infect(source.bits(), 0.0, &mut times, &mut boundary);
    let mut t = 0.0;
    while boundary.total() > 0 {
        let rate = boundary.total() as f64;
        let dt: f64 = Exp1.sample(rng);
        t += dt / rate;
        if t > horizon {
            break;
        }
        let v = boundary.find(rng.gen_range(0..boundary.total())) as u32;
        infect(v, t, &mut times, &mut boundary);
    }
    Ok(InfectionTimes { n, source: source.bits(), times })
}

/// `T` for replicate `rep`, exponential weights drawn lazily.
pub fn ofpp_replicate(n: u32, distribution: PassageDistribution, seed: u64, rep: u64) -> Result<f64> {
    let mut rng = replicate_rng(seed, rep);
    oriented_fpp_time(&mut LazyWeights::new(n, distribution, &mut rng))
}

/// Richardson run from `0̂` for replicate `rep`.
pub fn richardson_replicate(n: u32, horizon: f64, seed: u64, rep: u64) -> Result<InfectionTimes> {
    richardson_simulate(Vertex::bottom(n)?, horizon, &mut replicate_rng(seed, rep))
}

/// Cover time of a full Richardson run for replicate `rep`.
pub fn cover_replicate(n: u32, seed: u64, rep: u64) -> Result<f64> {
    cover_time(&richardson_replicate(n, f64::INFINITY, seed, rep)?)
}

/// Upper bound `n! e^{(1+K4)u} P(S_n ≤ u)` on `P(T ≤ u)`, `u = 1 - eps`,
/// computed as `e^{K4 u} u^n (1 + K_1(u, n))` to avoid the factorials.
pub fn ofpp_first_moment_bound(n: u32, eps: f64, k4: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Range(format!("eps must lie in (0, 1), got {eps}")));
    }
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    let u = 1.0 - eps;
    Ok(libm::exp(k4 * u + n as f64 * libm::log(u)) * (1.0 + erlang_k1(n, u)))
}

/// Both sides of the duality identity for one replicate:
/// `(T(1̂) ≤ t, A_1(s) ∩ A_2(t - s) ≠ ∅)`, each side on its own streams.
pub fn duality_replicate(n: u32, t: f64, s: f64, seed: u64, rep: u64) -> Result<(bool, bool)> {
    check_duality(t, s)?;
    let bottom = Vertex::bottom(n)?;
    let top = Vertex::top(n)?;
    let left = richardson_simulate(bottom, t, &mut stream(seed, rep, 0))?;
    let forward = richardson_simulate(bottom, s, &mut stream(seed, rep, 1))?;
    let backward = richardson_simulate(top, t - s, &mut stream(seed, rep, 2))?;
    let meet = forward.times.iter().zip(&backward.times).any(|(a, b)| a.is_finite() && b.is_finite());
    Ok((left.time(top) <= t, meet))
}

fn check_duality(t: f64, s: f64) -> Result<()> {
    if !(0.0 <= s && s <= t && t.is_finite()) {
        return Err(Error::Range(format!("need 0 <= s <= t < inf, got t = {t}, s = {s}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityEstimate {
    pub n: u32,
    pub t: f64,
    pub s: f64,
    pub left: McEstimate,
    pub right: McEstimate,
}

impl DualityEstimate {
    pub fn from_counts(n: u32, t: f64, s: f64, left: u64, right: u64, reps: u64, seed: u64) -> Result<Self> {
        Ok(DualityEstimate {
            n,
            t,
            s,
            left: McEstimate::from_counts(left, reps, seed)?,
            right: McEstimate::from_counts(right, reps, seed)?,
        })
    }

    /// `|left - right|` in units of the combined standard error. Zero when
    /// both estimates are degenerate and equal.
    pub fn z_score(&self) -> f64 {
        let diff = libm::fabs(self.left.point - self.right.point);
        let (a, b) = (self.left.std_err(), self.right.std_err());
        let se = libm::sqrt(a * a + b * b);
        if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            diff / se
        }
    }
}

pub fn duality_experiment(n: u32, t: f64, s: f64, reps: u64, seed: u64) -> Result<DualityEstimate> {
    check_duality(t, s)?;
    if reps == 0 {
        return Err(Error::Range("reps must be at least 1".into()));
    }
    let (mut left, mut right) = (0, 0);
    for rep in 0..reps {
        let (l, r) = duality_replicate(n, t, s, seed, rep)?;
        left += l as u64;
        right += r as u64;
    }
    DualityEstimate::from_counts(n, t, s, left, right, reps, seed)
}

/// Comparison of `T(y,0)` and `T(y,1)` at one base vertex `y ∈ B_{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerComparison {
    pub y: u32,
    /// `max_t [F̂_{(y,1)}(t) - F̂_{(y,0)}(t)]`, zero or more.
    pub gap: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    /// Standard error of the paired difference `T(y,1) - T(y,0)`.
    pub se_diff: f64,
    /// Gap exceeds the combined DKW band.
    pub gap_flagged: bool,
    /// `mean_upper < mean_lower - 3 se_diff`.
    pub mean_flagged: bool,
}

/// Empirical evidence on whether `T(y,0)` is stochastically smaller than
/// `T(y,1)`. Flags are findings to look at, not verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub n: u32,
    pub reps: u64,
    pub seed: u64,
    /// Twice the 99% DKW half-width for `reps` samples.
    pub band: f64,
    pub layers: Vec<LayerComparison>,
}

impl ConjectureReport {
    /// Builds the report from full infection-time vectors, one per replicate.
    pub fn from_samples(n: u32, samples: &[Vec<f64>], seed: u64) -> Result<Self> {
        check_conjecture_dim(n)?;
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let size = 1usize << n;
        if samples.iter().any(|s| s.len() != size) {
            return Err(Error::InvalidConfiguration(format!("every sample needs {size} times")));
        }
        let reps = samples.len();
        let band = 2.0 * dkw_epsilon(reps, 0.01);
        let last = 1u32 << (n - 1);
        let mut layers = Vec::with_capacity(last as usize);
        for y in 0..last {
            let mut lower: Vec<f64> = samples.iter().map(|s| s[y as usize]).collect();
            let mut upper: Vec<f64> = samples.iter().map(|s| s[(y | last) as usize]).collect();
            let diffs: Vec<f64> = lower.iter().zip(&upper).map(|(a, b)| b - a).collect();
            let (mean_lower, _) = mean_and_se(&lower)?;
            let (mean_upper, _) = mean_and_se(&upper)?;
            let (_, se_diff) = mean_and_se(&diffs)?;
            lower.sort_by(f64::total_cmp);
            upper.sort_by(f64::total_cmp);
            let gap = max_cdf_excess(&upper, &lower);
            layers.push(LayerComparison {
                y,
                gap,
                mean_lower,
                mean_upper,
                se_diff,
                gap_flagged: gap > band,
                mean_flagged: mean_upper < mean_lower - 3.0 * se_diff,
            });
        }
        Ok(ConjectureReport { n, reps: reps as u64, seed, band, layers })
    }

    pub fn flagged(&self) -> impl Iterator<Item = &LayerComparison> {
        self.layers.iter().filter(|l| l.gap_flagged || l.mean_flagged)
    }
}

fn check_conjecture_dim(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Range("layer comparison needs n >= 2".into()));
    }
    check_dim(n, CONJECTURE_MAX_N, "layer comparison dimension")
}

/// Full infection-time vector from `0̂` for replicate `rep`.
pub fn conjecture_replicate(n: u32, seed: u64, rep: u64) -> Result<Vec<f64>> {
    check_conjecture_dim(n)?;
    Ok(richardson_replicate(n, f64::INFINITY, seed, rep)?.times)
}

/// Largest `T(y,0) - T(y,1)` over `y` in one replicate.
pub fn layer_excess(n: u32, times: &[f64]) -> f64 {
    let last = 1usize << (n - 1);
    (0..last).map(|y| times[y] - times[y | last]).fold(f64::NEG_INFINITY, f64::max)
}

pub fn conjecture_monotonicity_test(n: u32, reps: u64, seed: u64) -> Result<ConjectureReport> {
    check_conjecture_dim(n)?;
    let samples = (0..reps).map(|rep| conjecture_replicate(n, seed, rep)).collect::<Result<Vec<_>>>()?;
    ConjectureReport::from_samples(n, &samples, seed)
}
