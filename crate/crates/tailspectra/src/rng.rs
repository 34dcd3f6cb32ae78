//! Seed derivation and the crate's fixed random number generator.
//!
//! Every sampler in this crate is a pure function of `(spec, dims, seed)`.
//! The generator is pinned to ChaCha8 (`rand_chacha::ChaCha8Rng`), a
//! counter-based stream cipher RNG with a period far beyond 2^128 whose output
//! for a given 64-bit seed is stable across platforms and releases. Parallel
//! work splits the master seed into independent streams with
//! [`derive_subseed`], never by sharing a generator.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Weyl-sequence increment used by SplitMix64.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for an independent stream from a master seed.
///
/// For fixed `master` the map `stream -> subseed` is injective (a Weyl step
/// followed by a bijective mix), so distinct streams can never collide.
///
/// ```
/// use tailspectra::rng::derive_subseed;
/// assert_ne!(derive_subseed(7, 0), derive_subseed(7, 1));
/// assert_eq!(derive_subseed(7, 3), derive_subseed(7, 3));
/// ```
pub fn derive_subseed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_mul(GOLDEN_GAMMA)))
}

/// Derives the per-task seed for grid point `n`, replication `r`.
pub fn derive_task_seed(master: u64, n: usize, replication: usize) -> u64 {
    derive_subseed(derive_subseed(master, n as u64), replication as u64)
}

/// The crate's generator, seeded from a 64-bit value.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
