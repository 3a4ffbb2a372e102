//! Percolation, first-passage percolation, Richardson's growth model and the
//! branching translation process on the Boolean lattice `B_n` (the n-cube).
//!
//! Everything here is pure computation over an injected random source, so the
//! crate is `no_std` and only needs `alloc`. File formats, the CLI and the
//! parallel experiment harness live in the `cubeperc` crate.
//!
//! Module map:
//!
//! * [`cube`]: vertices as bit masks, neighbours, complements and the
//!   permutation encoding of monotone paths.
//! * [`combinatorics`]: exact overlap counts `f(n,k)`, `F(n,k)` and the
//!   bounds on them, plus the path bijection between corner pairs.
//! * [`analytic`]: closed forms (extinction probability, Erlang tails,
//!   heat kernel, branching moments, limit constants).
//! * [`percolation`]: Bernoulli bond percolation, oriented and unoriented.
//! * [`fpp`]: first-passage percolation, Richardson's model, cover times,
//!   duality and the layer-monotonicity experiment.
//! * [`btp`]: the branching translation process.
//! * [`stats`]: Wilson intervals, two-sample Kolmogorov-Smirnov, DKW bands.
#![cfg_attr(not(test), no_std)]
// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod btp;
pub mod combinatorics;
pub mod cube;
mod error;
mod fenwick;
pub mod fpp;
pub mod math;
pub mod percolation;
pub mod rng;
pub mod stats;

pub use cube::{EdgeId, PathPerm, Vertex, MAX_DIM};
pub use error::{Error, Result};
