//! Deterministic random streams.
//!
//! Every experiment derives its randomness from a single 64-bit seed. Work
//! units (trials, runs, cells) each get their own ChaCha8 stream selected by
//! an index, so results do not depend on how work is scheduled across
//! threads. ChaCha is a counter-based generator: a `(seed, stream)` pair
//! names an independent, reproducible keystream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type StreamRng = ChaCha8Rng;

/// Root generator for `seed` (stream 0).
pub fn root(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One draw from `N(0, 1)`.
pub fn std_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng)
}

/// Packs a small tuple of indices into a single stream id.
pub fn stream_id(parts: &[u64]) -> u64 {
    // FNV-1a over the little-endian bytes; collisions are irrelevant at the
    // handful of ids an experiment uses, but the mapping must be stable.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
