//! Seeding rules shared by every randomized step.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded through
//! [`rand::SeedableRng::seed_from_u64`]. Independent streams (ensemble member
//! `i`, replication `r`, fold `f`) are split off a parent seed with
//! [`derive_seed`], i.e. `seed ^ splitmix64(stream)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used by the CLI when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

pub type DrsRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> DrsRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ splitmix64(stream)
}
