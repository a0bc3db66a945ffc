//! Deterministic random streams.
//!
//! Every randomized stage in the pipeline draws from a counter-based ChaCha
//! stream seeded explicitly by its caller, so a sample, a model init, or a
//! whole training run is a pure function of its seeds. Sub-stages derive
//! their own seeds with [`subseed`] instead of sharing one stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive an independent child seed from a parent seed and a stage tag.
pub fn subseed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Fresh deterministic stream for the given seed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
