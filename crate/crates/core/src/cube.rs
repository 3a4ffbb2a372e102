//! The Boolean lattice `B_n`.
//!
//! A vertex is a subset of `{1, ..., n}` stored as a bit mask: coordinate
//! label `j` (1-based, as used at the API boundary) lives in bit `j - 1`.
//! A monotone path from `A` to `B` with `A ⊆ B` is the order in which the
//! labels of `B \ A` are added, i.e. a [`PathPerm`].

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension. Arrays indexed by vertex have `2^n` slots.
pub const MAX_DIM: u32 = 30;

/// A vertex of `B_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    bits: u32,
    dim: u32,
}

fn check_dim(dim: u32) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidVertex(format!("dimension {dim} not in 1..={MAX_DIM}")));
    }
    Ok(())
}

impl Vertex {
    pub fn new(bits: u32, dim: u32) -> Result<Self> {
        check_dim(dim)?;
        if bits >> dim != 0 {
            return Err(Error::InvalidVertex(format!("mask {bits:#b} has bits above dimension {dim}")));
        }
        Ok(Vertex { bits, dim })
    }

    /// Vertex from 1-based coordinate labels.
    pub fn from_labels(labels: &[u32], dim: u32) -> Result<Self> {
        check_dim(dim)?;
        let mut bits = 0u32;
        for &j in labels {
            if j == 0 || j > dim {
                return Err(Error::InvalidVertex(format!("label {j} not in 1..={dim}")));
            }
            bits |= 1 << (j - 1);
        }
        Ok(Vertex { bits, dim })
    }

    /// `0̂`, the empty set.
    pub fn bottom(dim: u32) -> Result<Self> {
        Vertex::new(0, dim)
    }

    /// `1̂`, the full set.
    pub fn top(dim: u32) -> Result<Self> {
        check_dim(dim)?;
        Ok(Vertex { bits: full_mask(dim), dim })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dim(self) -> u32 {
        self.dim
    }

    pub fn level(self) -> u32 {
        self.bits.count_ones()
    }

    /// Whether 1-based label `j` is in the subset.
    pub fn contains(self, j: u32) -> bool {
        j >= 1 && j <= self.dim && self.bits & (1 << (j - 1)) != 0
    }

    pub fn is_subset_of(self, other: Vertex) -> bool {
        self.bits & !other.bits == 0
    }

    /// Labels in ascending order.
    pub fn labels(self) -> Vec<u32> {
        (1..=self.dim).filter(|&j| self.contains(j)).collect()
    }

    /// All `n` vertices at Hamming distance one, ascending coordinate.
    pub fn neighbors(self) -> Vec<Vertex> {
        (0..self.dim)
            .map(|b| Vertex { bits: self.bits ^ (1 << b), dim: self.dim })
            .collect()
    }

    /// The `n - level` neighbours one level up, ascending coordinate.
    pub fn upper_neighbors(self) -> Vec<Vertex> {
        (0..self.dim)
            .filter(|b| self.bits & (1 << b) == 0)
            .map(|b| Vertex { bits: self.bits | (1 << b), dim: self.dim })
            .collect()
    }

    pub fn complement(self) -> Vertex {
        Vertex { bits: !self.bits & full_mask(self.dim), dim: self.dim }
    }

    /// Coordinatewise sum mod 2 (symmetric difference).
    pub fn xor(self, other: Vertex) -> Vertex {
        debug_assert_eq!(self.dim, other.dim);
        Vertex { bits: self.bits ^ other.bits, dim: self.dim }
    }
}

pub(crate) fn full_mask(dim: u32) -> u32 {
    if dim >= 32 {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    }
}

/// A monotone path encoded as the sequence of 1-based labels it adds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathPerm {
    labels: Vec<u32>,
    dim: u32,
}

impl PathPerm {
    pub fn new(labels: Vec<u32>, dim: u32) -> Result<Self> {
        check_dim(dim).map_err(|e| Error::InvalidPath(format!("{e}")))?;
        let mut seen = 0u32;
        for &j in &labels {
            if j == 0 || j > dim {
                return Err(Error::InvalidPath(format!("label {j} not in 1..={dim}")));
            }
            if seen & (1 << (j - 1)) != 0 {
                return Err(Error::InvalidPath(format!("label {j} repeated")));
            }
            seen |= 1 << (j - 1);
        }
        Ok(PathPerm { labels, dim })
    }

    /// The path `(1, 2, ..., n)`.
    pub fn identity(dim: u32) -> Result<Self> {
        PathPerm::new((1..=dim).collect(), dim)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Mask of the labels the path adds.
    pub fn label_mask(&self) -> u32 {
        self.labels.iter().fold(0, |m, &j| m | (1 << (j - 1)))
    }

    /// Vertices visited from `start`, one per level.
    pub fn vertices(&self, start: Vertex) -> Result<Vec<Vertex>> {
        path_vertices(self, start)
    }

    /// Directed edges traversed from `start`, in order.
    pub fn edges(&self, start: Vertex) -> Result<Vec<EdgeId>> {
        let verts = self.vertices(start)?;
        Ok(verts
            .iter()
            .zip(self.labels.iter())
            .map(|(&lower, &coord)| EdgeId { lower, coord, oriented: true })
            .collect())
    }
}

/// Vertices of the path `p` started at `start`; the walk adds one label per step.
pub fn path_vertices(p: &PathPerm, start: Vertex) -> Result<Vec<Vertex>> {
    if p.dim != start.dim {
        return Err(Error::InvalidPath(format!(
            "path dimension {} differs from vertex dimension {}",
            p.dim, start.dim
        )));
    }
    let mut out = Vec::with_capacity(p.len() + 1);
    let mut cur = start;
    out.push(cur);
    for &j in &p.labels {
        if cur.contains(j) {
            return Err(Error::InvalidPath(format!("label {j} already present in {:#b}", cur.bits)));
        }
        cur = Vertex { bits: cur.bits | (1 << (j - 1)), dim: cur.dim };
        out.push(cur);
    }
    Ok(out)
}

/// The edge `lower → lower ∪ {coord}`.
///
/// With `oriented == false` the same edge is also reachable from its upper
/// end; [`EdgeId::between`] normalises either endpoint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    lower: Vertex,
    coord: u32,
    oriented: bool,
}

impl EdgeId {
    pub fn new(lower: Vertex, coord: u32, oriented: bool) -> Result<Self> {
        if coord == 0 || coord > lower.dim {
            return Err(Error::InvalidVertex(format!("coordinate {coord} not in 1..={}", lower.dim)));
        }
        if lower.contains(coord) {
            return Err(Error::InvalidVertex(format!("coordinate {coord} already in lower endpoint")));
        }
        Ok(EdgeId { lower, coord, oriented })
    }

    /// Unoriented edge between two adjacent vertices, in either order.
    pub fn between(v: Vertex, w: Vertex) -> Result<Self> {
        if v.dim != w.dim {
            return Err(Error::InvalidVertex("endpoints from different cubes".into()));
        }
        let diff = v.bits ^ w.bits;
        if diff.count_ones() != 1 {
            return Err(Error::InvalidVertex(format!("{:#b} and {:#b} are not adjacent", v.bits, w.bits)));
        }
        let lower = if v.bits < w.bits { v } else { w };
        Ok(EdgeId { lower, coord: diff.trailing_zeros() + 1, oriented: false })
    }

    pub fn lower(self) -> Vertex {
        self.lower
    }

    pub fn upper(self) -> Vertex {
        Vertex { bits: self.lower.bits | (1 << (self.coord - 1)), dim: self.lower.dim }
    }

    /// 1-based coordinate label.
    pub fn coord(self) -> u32 {
        self.coord
    }

    pub fn oriented(self) -> bool {
        self.oriented
    }

    /// Slot in a dense `n * 2^n` per-edge table.
    pub fn table_index(self) -> usize {
        edge_index(self.lower.dim, self.lower.bits, self.coord - 1)
    }
}

/// Dense table slot for the edge leaving `lower` along bit `bit`.
#[inline]
pub(crate) fn edge_index(dim: u32, lower: u32, bit: u32) -> usize {
    lower as usize * dim as usize + bit as usize
}

/// Visits every permutation of `items` in lexicographic order.
pub(crate) fn for_each_permutation<T: Ord + Copy, F: FnMut(&[T])>(items: &mut [T], mut f: F) {
    items.sort_unstable();
    loop {
        f(items);
        if !next_permutation(items) {
            break;
        }
    }
}

/// Advances to the lexicographically next permutation; `false` after the last.
pub(crate) fn next_permutation<T: Ord>(a: &mut [T]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}
