//! Reproducible random streams.
//!
//! Every replicate gets its own ChaCha12 stream seeded by a splitmix64 hash
//! of (master seed, replicate index). Streams are therefore independent of
//! worker identity and thread count, and re-runs with the same master seed
//! reproduce every replicate bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type ReplicateRng = ChaCha12Rng;

/// splitmix64 finalizer; bijective on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives the seed for one replicate. Injective in `index` for a fixed
/// master seed, so distinct replicates never share a stream.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mixed = splitmix64(master).wrapping_add(index.wrapping_mul(0x9E3779B97F4A7C15));
    splitmix64(mixed)
}

pub fn replicate_rng(seed: u64) -> ReplicateRng {
    ChaCha12Rng::seed_from_u64(seed)
}
