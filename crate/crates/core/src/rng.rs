//! Seed derivation for reproducible RNG substreams.
//!
//! A chain, a forecast draw and a simulator each get their own ChaCha stream
//! derived from `(base_seed, stream_id)`. Derivation goes through a splitmix64
//! scramble so that neighbouring stream ids do not produce correlated ChaCha
//! key material.

use rand_chacha::ChaCha20Rng;
use rand_chacha::rand_core::SeedableRng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a substream seed from a base seed and a stream identifier.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(base) ^ splitmix64(stream.wrapping_add(0x51ed_270b)))
}

/// RNG for the given `(base, stream)` pair.
pub fn substream(base: u64, stream: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(base, stream))
}

/// RNG seeded directly from `seed` (stream 0 convention).
pub fn root(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
