//! Seeded random streams.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the user seed, a
//! domain tag and a tuple of indices (trial, slot, channel, ...). Results
//! therefore do not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Channel outputs, keyed by (trial, slot, channel).
pub const CHANNEL: u64 = 1;
/// Message draws, keyed by (trial).
pub const MESSAGE: u64 = 2;
/// Random codebooks and code construction.
pub const CODEBOOK: u64 = 3;
/// Gaussian noise, keyed by (block, slot, noise index).
pub const NOISE: u64 = 4;
/// Source symbols and other per-block draws.
pub const SOURCE: u64 = 5;
/// Random table codes used in tests and experiments.
pub const TABLE: u64 = 6;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, domain, indices)`.
pub fn stream(seed: u64, domain: u64, indices: &[u64]) -> Stream {
    let mut state = splitmix(seed ^ splitmix(domain));
    for &i in indices {
        state = splitmix(state ^ splitmix(i.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
