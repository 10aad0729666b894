//! Reproducible random streams.
//!
//! Every stochastic routine draws from ChaCha8 (a counter-based stream
//! cipher generator). The key is derived from the master seed with
//! `SeedableRng::seed_from_u64` and replica `r` uses ChaCha stream id `r`,
//! so replicas are independent, order-free and individually replayable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for replica `replica` under `master_seed`.
pub fn replica_rng(master_seed: u64, replica: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// Generator for a single, non-replicated run.
pub fn seeded(seed: u64) -> SimRng {
    replica_rng(seed, 0)
}

/// Sub-seed for an independent family of replicas (e.g. one per experiment
/// stage), mixed with SplitMix64 so nearby tags do not collide.
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    let mut z = master_seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
