//! Splittable, counter-addressed random streams.
//!
//! Every stochastic unit of work (a replication, a bootstrap draw) gets its
//! own ChaCha stream addressed by `(parent seed, index)`, so results never
//! depend on scheduling or thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The random stream with number `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for nesting streams (e.g. replication → bootstrap draws).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).next_u64()
}
