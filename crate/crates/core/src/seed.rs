//! Seed derivation. Every random decision in a run draws from a stream whose
//! seed is a pure function of the scenario seed and a label path, so results
//! do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream labels.
pub mod label {
    pub const TOPOLOGY: u64 = 1;
    pub const BIDS: u64 = 2;
    pub const ASKS: u64 = 3;
    pub const TIER1: u64 = 4;
    pub const REPETITION: u64 = 5;
    pub const DEVIATION: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `parts` into `base`, one splitmix round per part.
pub fn derive(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(base: u64, parts: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive(base, parts))
}
