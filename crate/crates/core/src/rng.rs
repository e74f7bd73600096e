//! Deterministic derivation of per-component random streams.
//!
//! Every stream is identified by a master seed plus a list of integer tags
//! (component, replication, round, action, ...). Tags are folded into the
//! seed with the SplitMix64 finalizer, and the result seeds a ChaCha8 stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags for the simulator's components.
pub mod tag {
    pub const DEMAND: u64 = 0x64656d616e64;
    pub const OUTCOME: u64 = 0x6f7574636f6d65;
    pub const POLICY: u64 = 0x706f6c696379;
    pub const REPLICATION: u64 = 0x7265706c;
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `seed`, one SplitMix64 round per tag.
pub fn mix_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, tags))
}
