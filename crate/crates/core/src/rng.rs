//! Reproducible randomness.
//!
//! Every stochastic routine takes a `u64` seed and builds a [`ChaCha8Rng`]
//! from it. Independent streams (restarts, replications, trials) get their
//! own seed through [`derive_seed`], so results never depend on the order in
//! which parallel workers pick up jobs.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type BlockRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> BlockRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of stream identifiers into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}
