//! Bernoulli bond percolation on `B_n`, oriented (edges point up a level)
//! and unoriented.
//!
//! Edges are keyed by their lower endpoint and the coordinate they add, so
//! an oriented and an unoriented configuration share one representation and
//! differ only in how connectivity reads it.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{edge_index, full_mask, Vertex};
use crate::error::{Error, Result};
use crate::rng::replicate_rng;
use crate::stats::McEstimate;

/// Largest dimension for sampled configurations.
pub const MAX_N: u32 = 26;
/// Largest dimension for exhaustive enumeration (`2^{n 2^{n-1}}` configurations).
pub const EXACT_MAX_N: u32 = 3;
/// Largest dimension for open-path counting (`n! < 2^64` up to 20).
pub const COUNT_MAX_N: u32 = 20;

fn check_n(n: u32, limit: u32, what: &'static str) -> Result<()> {
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    if n > limit {
        return Err(Error::Capacity { what, limit: limit as u64 });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range(format!("edge probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Open edges, stored per vertex as a mask of open upward coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenEdgeSet {
    n: u32,
    oriented: bool,
    open_up: Vec<u32>,
}

impl OpenEdgeSet {
    pub fn closed(n: u32, oriented: bool) -> Result<Self> {
        check_n(n, MAX_N, "percolation dimension")?;
        Ok(OpenEdgeSet { n, oriented, open_up: vec![0; 1 << n] })
    }

    pub fn all_open(n: u32, oriented: bool) -> Result<Self> {
        let mut cfg = Self::closed(n, oriented)?;
        let full = full_mask(n);
        for (v, m) in cfg.open_up.iter_mut().enumerate() {
            *m = full & !(v as u32);
        }
        Ok(cfg)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn oriented(&self) -> bool {
        self.oriented
    }

    /// Same edges read the other way.
    pub fn with_orientation(mut self, oriented: bool) -> Self {
        self.oriented = oriented;
        self
    }

    /// Whether the edge `lower → lower ∪ {bit + 1}` is open.
    pub fn is_open(&self, lower: u32, bit: u32) -> bool {
        self.open_up[lower as usize] & (1 << bit) != 0
    }

    pub fn set_open(&mut self, lower: Vertex, coord: u32, open: bool) -> Result<()> {
        let edge = crate::cube::EdgeId::new(lower, coord, self.oriented)?;
        let slot = &mut self.open_up[edge.lower().bits() as usize];
        if open {
            *slot |= 1 << (coord - 1);
        } else {
            *slot &= !(1 << (coord - 1));
        }
        Ok(())
    }

    pub fn open_count(&self) -> u64 {
        self.open_up.iter().map(|m| m.count_ones() as u64).sum()
    }

    /// `n 2^{n-1}`.
    pub fn edge_count(&self) -> u64 {
        (self.n as u64) << (self.n - 1)
    }

    /// Every edge of `self` is open in `other`.
    pub fn is_subset_of(&self, other: &OpenEdgeSet) -> bool {
        self.open_up.iter().zip(&other.open_up).all(|(a, b)| a & !b == 0)
    }
}

/// One uniform per edge, drawn in canonical order (lower endpoint ascending,
/// then coordinate ascending). Thresholding at different `p` couples the
/// configurations monotonically.
#[derive(Debug, Clone)]
pub struct EdgeUniforms {
    n: u32,
    uniforms: Vec<f64>,
}

impl EdgeUniforms {
    pub fn sample<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_n(n, MAX_N, "percolation dimension")?;
        let mut uniforms = vec![f64::NAN; (n as usize) << n];
        for v in 0..(1u32 << n) {
            for bit in 0..n {
                if v & (1 << bit) == 0 {
                    uniforms[edge_index(n, v, bit)] = rng.gen::<f64>();
                }
            }
        }
        Ok(EdgeUniforms { n, uniforms })
    }

    pub fn threshold(&self, p: f64, oriented: bool) -> Result<OpenEdgeSet> {
        check_p(p)?;
        let mut cfg = OpenEdgeSet::closed(self.n, oriented)?;
        for v in 0..(1u32 << self.n) {
            let mut mask = 0;
            for bit in 0..self.n {
                if v & (1 << bit) == 0 && self.uniforms[edge_index(self.n, v, bit)] < p {
                    mask |= 1 << bit;
                }
            }
            cfg.open_up[v as usize] = mask;
        }
        Ok(cfg)
    }
}

/// Each of the `n 2^{n-1}` edges open independently with probability `p`.
///
/// Draws exactly as [`EdgeUniforms::sample`] followed by `threshold(p)`.
pub fn sample_open_edges<R: Rng + ?Sized>(n: u32, p: f64, oriented: bool, rng: &mut R) -> Result<OpenEdgeSet> {
    check_p(p)?;
    let mut cfg = OpenEdgeSet::closed(n, oriented)?;
    for v in 0..(1u32 << n) {
        let mut mask = 0;
        for bit in 0..n {
            if v & (1 << bit) == 0 && rng.gen::<f64>() < p {
                mask |= 1 << bit;
            }
        }
        cfg.open_up[v as usize] = mask;
    }
    Ok(cfg)
}

/// Whether an oriented open path runs from `0̂` to `1̂`.
///
/// Ascending mask order is a topological order of the upward edges, so one
/// pass suffices.
pub fn oriented_connected(cfg: &OpenEdgeSet) -> bool {
    let size = 1usize << cfg.n;
    let mut reached = vec![false; size];
    reached[0] = true;
    for v in 0..size {
        if !reached[v] {
            continue;
        }
        let mut up = cfg.open_up[v];
        while up != 0 {
            let bit = up.trailing_zeros();
            up &= up - 1;
            reached[v | (1 << bit)] = true;
        }
    }
    reached[size - 1]
}

/// Whether `0̂` and `1̂` lie in the same open cluster, edges read both ways.
pub fn unoriented_connected(cfg: &OpenEdgeSet) -> bool {
    let n = cfg.n;
    let top = full_mask(n);
    let mut seen = vec![false; 1 << n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0u32);
    while let Some(v) = queue.pop_front() {
        if v == top {
            return true;
        }
        for bit in 0..n {
            let w = v ^ (1 << bit);
            if seen[w as usize] {
                continue;
            }
            let lower = v.min(w);
            if cfg.is_open(lower, bit) {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

pub fn connected(cfg: &OpenEdgeSet) -> bool {
    if cfg.oriented {
        oriented_connected(cfg)
    } else {
        unoriented_connected(cfg)
    }
}

/// `P(0̂ ↔ 1̂)` by summing over all `2^{n 2^{n-1}}` configurations.
pub fn exact_connection_probability(n: u32, p: f64, oriented: bool) -> Result<f64> {
    check_n(n, EXACT_MAX_N, "exact enumeration dimension")?;
    check_p(p)?;
    let edges: Vec<(u32, u32)> = (0..(1u32 << n))
        .flat_map(|v| (0..n).filter(move |b| v & (1 << b) == 0).map(move |b| (v, b)))
        .collect();
    let m = edges.len() as u32;
    let mut total = 0.0;
    let mut cfg = OpenEdgeSet::closed(n, oriented)?;
    for config in 0u64..(1u64 << m) {
        cfg.open_up.iter_mut().for_each(|x| *x = 0);
        for (i, &(v, b)) in edges.iter().enumerate() {
            if config & (1 << i) != 0 {
                cfg.open_up[v as usize] |= 1 << b;
            }
        }
        if connected(&cfg) {
            let open = config.count_ones() as i32;
            total += libm::pow(p, open as f64) * libm::pow(1.0 - p, (m as i32 - open) as f64);
        }
    }
    Ok(total)
}

/// Number of monotone `0̂ → 1̂` paths whose edges are all open.
pub fn count_open_paths(cfg: &OpenEdgeSet) -> Result<u64> {
    check_n(cfg.n, COUNT_MAX_N, "open-path counting dimension")?;
    let size = 1usize << cfg.n;
    let mut ways = vec![0u64; size];
    ways[0] = 1;
    for v in 0..size {
        let w = ways[v];
        if w == 0 {
            continue;
        }
        let mut up = cfg.open_up[v];
        while up != 0 {
            let bit = up.trailing_zeros();
            up &= up - 1;
            ways[v | (1 << bit)] += w;
        }
    }
    Ok(ways[size - 1])
}

struct BitSet(Vec<u64>);

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }
    fn get(&self, i: u32) -> bool {
        self.0[(i >> 6) as usize] & (1 << (i & 63)) != 0
    }
    fn set(&mut self, i: u32) {
        self.0[(i >> 6) as usize] |= 1 << (i & 63);
    }
}

/// One connectivity trial, drawing edge states only as the search from `0̂`
/// first examines them (each edge at most once).
pub fn sample_connected_lazy<R: Rng + ?Sized>(n: u32, p: f64, oriented: bool, rng: &mut R) -> Result<bool> {
    check_n(n, MAX_N, "percolation dimension")?;
    check_p(p)?;
    let top = full_mask(n);
    let mut seen = BitSet::new(1 << n);
    let mut queue = VecDeque::new();
    seen.set(0);
    queue.push_back(0u32);
    while let Some(v) = queue.pop_front() {
        if v == top {
            return Ok(true);
        }
        for bit in 0..n {
            let w = v ^ (1 << bit);
            if oriented && w < v {
                continue;
            }
            // An unseen neighbour has not been popped, so this edge is fresh.
            if seen.get(w) {
                continue;
            }
            if rng.gen::<f64>() < p {
                seen.set(w);
                queue.push_back(w);
            }
        }
    }
    Ok(false)
}

/// Connection estimate at `p = c/n` with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionEstimate {
    pub n: u32,
    pub c: f64,
    pub p: f64,
    pub oriented: bool,
    pub estimate: McEstimate,
}

/// Edge probability `c / n`, checked to lie in `[0, 1]`.
pub fn edge_probability(n: u32, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    let p = c / n as f64;
    check_p(p)?;
    Ok(p)
}

/// Replicate `rep` of the connection experiment.
pub fn connection_replicate(n: u32, c: f64, oriented: bool, seed: u64, rep: u64) -> Result<bool> {
    let p = edge_probability(n, c)?;
    sample_connected_lazy(n, p, oriented, &mut replicate_rng(seed, rep))
}

/// `reps` independent trials at `p = c/n`, replicate `i` on stream `(seed, i)`.
pub fn mc_connection_probability(n: u32, c: f64, reps: u64, oriented: bool, seed: u64) -> Result<ConnectionEstimate> {
    if reps == 0 {
        return Err(Error::Range("reps must be at least 1".into()));
    }
    let p = edge_probability(n, c)?;
    let mut successes = 0;
    for rep in 0..reps {
        if connection_replicate(n, c, oriented, seed, rep)? {
            successes += 1;
        }
    }
    Ok(ConnectionEstimate { n, c, p, oriented, estimate: McEstimate::from_counts(successes, reps, seed)? })
}
