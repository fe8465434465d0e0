//! Deterministic derivation of independent random streams from one scenario
//! seed, so that every node, adversary and delay sampler draws from its own
//! reproducible stream regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags.
pub const QUANTIZER: u64 = 1;
pub const SCHEDULE: u64 = 2;
pub const ADVERSARY: u64 = 3;
pub const DELAY: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a seed and a list of words into one 64-bit value.
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix(seed), |acc, &w| splitmix(acc ^ splitmix(w)))
}

pub fn stream(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, words))
}

/// Uniform draw from `lo..=hi` keyed by `words`.
pub fn keyed_range(seed: u64, words: &[u64], lo: i64, hi: i64) -> i64 {
    debug_assert!(lo <= hi);
    let span = (hi - lo) as u64 + 1;
    lo + (mix(seed, words) % span) as i64
}
