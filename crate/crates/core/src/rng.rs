//! Counter-style derivation of independent random streams.
//!
//! Every stream is a pure function of `(master seed, domain, index, sub-index)`,
//! so realization `n` draws the same numbers no matter which thread produces it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Separates the random streams of unrelated consumers sharing one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Channel = 0x6368_616e,
    MutualInformation = 0x6d75_7469,
    Test = 0x7465_7374,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for `(seed, domain, index, sub)`.
pub fn derive_stream(seed: u64, domain: Domain, index: u64, sub: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let mut h = splitmix64(seed ^ domain as u64);
    for (chunk, word) in key.chunks_exact_mut(8).zip([index, sub, 0, 1]) {
        h = splitmix64(h ^ word);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
