//! Counter-based random streams.
//!
//! Every stochastic routine derives one independent ChaCha stream per
//! replication from `(seed, index)`. Because ChaCha is itself a counter-mode
//! generator, stream `index` is fully determined by the pair and does not
//! depend on which thread consumes it or in which order, so serial and
//! parallel runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream number `index` under the master `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream reserved for one-shot draws (graph sampling, instance generation)
/// that must not collide with replication streams `0..reps`.
pub fn aux_stream(seed: u64, tag: u64) -> StreamRng {
    stream(seed, u64::MAX - tag)
}
