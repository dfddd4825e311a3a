//! Seeded randomness. Every stochastic routine takes a [`Rng`] built from an
//! explicit `u64` seed; the generator is ChaCha8 (`rand_chacha`), so a given
//! seed reproduces the same stream on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a labelled sub-task of a seeded run.
pub fn derived(seed: u64, label: &str) -> Rng {
    // FNV-1a over the label, mixed into the seed.
    let h = label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    seeded(seed ^ h.rotate_left(17))
}
