//! Deterministic seed derivation.
//!
//! All randomness in this crate flows from one master seed. Worker tasks
//! (pairs of a non-rejection-rate matrix, replicates of an experiment, grid
//! cells) receive seeds derived with [`derive_seed`], so results are
//! reproducible and independent of scheduling or thread count.
//!
//! The derivation is SplitMix64 (Steele, Lea & Flood 2014): the master seed
//! is advanced by the golden-ratio increment once per component and each
//! state is passed through the SplitMix64 finalizer. The stream RNG seeded
//! from the result is ChaCha with 8 rounds.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with an ordered list of component indices.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(master.wrapping_add(GOLDEN_GAMMA));
    for &p in parts {
        state = splitmix64(state.wrapping_add(p.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
    }
    state
}

/// The crate's stream RNG, seeded from a (possibly derived) 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
