//! Binary indexed tree over nonnegative integer weights, used to pick an
//! index with probability proportional to its weight.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
    top_bit: usize,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Self {
        let mut top_bit = 1;
        while top_bit * 2 <= len {
            top_bit *= 2;
        }
        Fenwick {
            tree: vec![0; len + 1],
            weights: vec![0; len],
            total: 0,
            top_bit,
        }
    }

    pub(crate) fn total(&self) -> u64 {
        self.total
    }

    pub(crate) fn weight(&self, index: usize) -> u64 {
        self.weights[index]
    }

    pub(crate) fn add(&mut self, index: usize, delta: u64) {
        self.weights[index] += delta;
        self.total += delta;
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    pub(crate) fn sub(&mut self, index: usize, delta: u64) {
        self.weights[index] -= delta;
        self.total -= delta;
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] -= delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `target` (`target < total`).
    pub(crate) fn find(&self, mut target: u64) -> usize {
        debug_assert!(target < self.total);
        let mut pos = 0;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_matches_linear_scan() {
        let w = [3u64, 0, 5, 1, 0, 0, 7, 2, 4];
        let mut f = Fenwick::new(w.len());
        for (i, &x) in w.iter().enumerate() {
            f.add(i, x);
        }
        f.sub(2, 2);
        f.add(4, 1);
        let cur = [3u64, 0, 3, 1, 1, 0, 7, 2, 4];
        assert_eq!(f.total(), cur.iter().sum::<u64>());
        for target in 0..f.total() {
            let mut acc = 0;
            let mut expect = 0;
            for (i, &x) in cur.iter().enumerate() {
                acc += x;
                if acc > target {
                    expect = i;
                    break;
                }
            }
            assert_eq!(f.find(target), expect, "target {target}");
        }
    }
}
