//! Seeded randomness shared by all sampling operations.
//!
//! Everything random in this crate flows through a ChaCha8 stream cipher
//! keyed by a caller-supplied seed, with the two primitives below. Keeping
//! the draw algorithms explicit (instead of relying on a library's
//! distribution internals) pins results across library upgrades.

use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// In-place Fisher–Yates shuffle; index at step i is `next_u64() % (i+1)`.
/// The modulo bias is far below anything observable at corpus scale.
pub fn shuffle<T>(items: &mut [T], rng: &mut SeededRng) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Uniform draw in [0, 1) with 53 bits of precision.
pub fn uniform_f64(rng: &mut SeededRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
