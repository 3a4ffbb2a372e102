//! Branching translation process.
//!
//! Every particle gives birth at rate `n`; the child lands on a uniform
//! neighbour of its parent. Started from one particle at `0̂`. The whole
//! system jumps at rate `n * total`, the parent is picked proportionally to
//! site occupancy, so each event costs `O(n)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::rng::replicate_rng;

/// Largest dimension (occupancy is stored densely over `2^n` sites).
pub const MAX_N: u32 = 22;
/// Population cap used when the caller has no better choice.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BtpPopulation {
    n: u32,
    counts: Vec<u64>,
    total: u64,
    time: f64,
    cap: u64,
}

impl BtpPopulation {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `Z(x, t)`.
    pub fn count(&self, x: Vertex) -> u64 {
        self.counts[x.bits() as usize]
    }

    /// Occupancy by vertex mask.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BtpOutcome {
    Snapshot(BtpPopulation),
    /// A birth at `time` would have pushed the population past the cap.
    Overflow { time: f64, population: u64 },
}

/// `τ`, or a lower bound on it when the cap was hit first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FirstHit {
    Hit(f64),
    Censored(f64),
}

impl FirstHit {
    pub fn time(self) -> f64 {
        match self {
            FirstHit::Hit(t) | FirstHit::Censored(t) => t,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, FirstHit::Censored(_))
    }
}

struct Process {
    n: u32,
    counts: Vec<u64>,
    sites: Fenwick,
    time: f64,
}

impl Process {
    fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range("n must be at least 1".into()));
        }
        if n > MAX_N {
            return Err(Error::Capacity { what: "branching process dimension", limit: MAX_N as u64 });
        }
        let mut counts = vec![0; 1 << n];
        let mut sites = Fenwick::new(1 << n);
        counts[0] = 1;
        sites.add(0, 1);
        Ok(Process { n, counts, sites, time: 0.0 })
    }

    fn total(&self) -> u64 {
        self.sites.total()
    }

    /// Time of the next birth.
    fn next_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let dt: f64 = Exp1.sample(rng);
        self.time + dt / (self.n as f64 * self.total() as f64)
    }

    /// Places one child and returns its site.
    fn birth<R: Rng + ?Sized>(&mut self, time: f64, rng: &mut R) -> u32 {
        let parent = self.sites.find(rng.gen_range(0..self.total())) as u32;
        let child = parent ^ (1 << rng.gen_range(0..self.n));
        self.counts[child as usize] += 1;
        self.sites.add(child as usize, 1);
        self.time = time;
        child
    }
}

fn check_cap(cap: u64) -> Result<()> {
    if cap == 0 {
        return Err(Error::Range("cap must be at least 1".into()));
    }
    Ok(())
}

/// State at `t_end`, or the overflow time if the population passes `cap`.
pub fn btp_simulate<R: Rng + ?Sized>(n: u32, t_end: f64, cap: u64, rng: &mut R) -> Result<BtpOutcome> {
    check_cap(cap)?;
    if t_end.is_nan() || t_end < 0.0 {
        return Err(Error::Range(format!("t_end must be nonnegative, got {t_end}")));
    }
    let mut p = Process::new(n)?;
    loop {
        let next = p.next_time(rng);
        if next > t_end {
            break;
        }
        if p.total() >= cap {
            return Ok(BtpOutcome::Overflow { time: next, population: p.total() });
        }
        p.birth(next, rng);
    }
    let total = p.total();
    Ok(BtpOutcome::Snapshot(BtpPopulation { n, counts: p.counts, total, time: t_end, cap }))
}

/// First time some particle sits on `target`.
pub fn btp_first_hit<R: Rng + ?Sized>(target: Vertex, cap: u64, rng: &mut R) -> Result<FirstHit> {
    check_cap(cap)?;
    let mut p = Process::new(target.dim())?;
    if target.bits() == 0 {
        return Ok(FirstHit::Hit(0.0));
    }
    loop {
        let next = p.next_time(rng);
        if p.total() >= cap {
            return Ok(FirstHit::Censored(next));
        }
        if p.birth(next, rng) == target.bits() {
            return Ok(FirstHit::Hit(next));
        }
    }
}

pub fn btp_replicate(n: u32, t_end: f64, cap: u64, seed: u64, rep: u64) -> Result<BtpOutcome> {
    btp_simulate(n, t_end, cap, &mut replicate_rng(seed, rep))
}

/// First hit of `1̂` for replicate `rep`.
pub fn first_hit_replicate(n: u32, cap: u64, seed: u64, rep: u64) -> Result<FirstHit> {
    btp_first_hit(Vertex::top(n)?, cap, &mut replicate_rng(seed, rep))
}
