//! Seeded random streams.
//!
//! Every consumer derives its own ChaCha8 stream from one user seed, so runs
//! are reproducible and independent parts never share a stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recorded in reports so a run can be reproduced.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

/// Stream ids within one seed.
pub(crate) const STEP_STREAM: u64 = 0;
pub(crate) const START_STREAM: u64 = 1;
pub(crate) const INPUT_STREAM: u64 = 2;

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes `label` into `seed` (splitmix64 finalizer) for sub-components.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal draw tied to `index`: the same index always gives the same
/// value regardless of the order in which indices are requested.
pub(crate) fn indexed_gaussian(rng: &mut ChaCha8Rng, index: usize) -> f64 {
    // Two u64 (four 32-bit words) per index.
    rng.set_word_pos((index as u128) * 4);
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * scale;
    let u2 = (rng.next_u64() >> 11) as f64 * scale;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
