//! Seed splitting.
//!
//! Every random stream in the crate is derived from a master seed and a
//! stream index with [`derive`], a SplitMix64 finaliser applied to
//! `master ^ golden * (index + 1)`. Streams for different indices are
//! decorrelated and the mapping is stable across platforms and releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of stream `index` from `master`.
pub fn derive(master: u64, index: u64) -> u64 {
    splitmix64(master ^ GOLDEN.wrapping_mul(index.wrapping_add(1)))
}

/// A ChaCha8 generator for stream `index` of `master`.
pub fn rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, index))
}

/// Fixed stream indices used by the harness for one run.
pub mod stream {
    pub const DATA: u64 = 0;
    pub const INIT: u64 = 1;
    pub const SAMPLER: u64 = 2;
}
