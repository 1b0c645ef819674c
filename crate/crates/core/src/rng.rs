//! Deterministic RNG stream derivation.
//!
//! Every random consumer gets its own ChaCha stream derived from the run seed and a
//! small tuple of coordinates, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for `(seed, tag, a)` on ChaCha stream `b`.
pub fn substream(seed: u64, tag: u64, a: u64, b: u64) -> Rng {
    let key = mix64(mix64(seed ^ mix64(tag)) ^ a);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(b);
    rng
}
