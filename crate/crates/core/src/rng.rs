//! Reproducible random streams.
//!
//! Every replicate of every experiment draws from its own ChaCha8 stream,
//! keyed by `(seed, replicate, lane)`. Replicates therefore produce the same
//! samples no matter how they are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Identifier recorded in experiment output.
pub const RNG_ID: &str = "ChaCha8Rng(seed_from_u64(seed), stream = replicate << 8 | lane)";

/// Independent sub-streams available to a single replicate.
pub const LANES: u64 = 256;

/// Stream for replicate `replicate`, sub-stream `lane` (< [`LANES`]).
pub fn stream(seed: u64, replicate: u64, lane: u64) -> ChaCha8Rng {
    debug_assert!(lane < LANES);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate.wrapping_mul(LANES) | lane);
    rng
}

/// Shorthand for lane 0.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    stream(seed, replicate, 0)
}
