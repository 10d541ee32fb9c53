//! Seed derivation and the generator used by every sampler.
//!
//! `mix(base, r)` is the SplitMix64 finalizer applied to
//! `base ^ (r + 1) * 0x9E3779B97F4A7C15` (wrapping arithmetic):
//!
//! ```text
//! z = base ^ (r + 1).wrapping_mul(0x9E3779B97F4A7C15)
//! z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9)
//! z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB)
//! z ^ (z >> 31)
//! ```
//!
//! A generator for seed `s` is ChaCha8 keyed with the four little-endian
//! words `mix(s, 0), mix(s, 1), mix(s, 2), mix(s, 3)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix(base: u64, r: u64) -> u64 {
    let mut z = base ^ r.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(seed, i as u64).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Generator for seed `seed` on ChaCha stream `stream`.
pub fn rng_on_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(stream);
    rng
}
