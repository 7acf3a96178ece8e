//! Splittable seed derivation.
//!
//! Every random stream in the crate is keyed by a 64-bit seed derived from a
//! parent seed and a stream index. Derivation is a pure function, so the
//! stream a replicate sees depends only on its index and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `seed`.
#[inline]
pub fn derive(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Child seed along a path of stream indices.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |acc, &i| derive(acc, i))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
