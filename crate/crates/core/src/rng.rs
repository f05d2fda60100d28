//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] keyed by a tuple of
//! counters. The 32-byte ChaCha key is the little-endian concatenation of
//! `(master, domain, a, b)`, so distinct tuples give independent streams and
//! adding cells to an experiment grid never perturbs existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains used by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Synthetic = 1,
    Spammers = 2,
    AucSampling = 3,
    Replication = 4,
}

pub fn stream(master: u64, domain: Domain, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([master, domain as u64, a, b])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Folds a tuple of counters into a single 64-bit seed (for reports).
pub fn derive_seed(master: u64, domain: Domain, a: u64, b: u64) -> u64 {
    use rand::RngCore;
    stream(master, domain, a, b).next_u64()
}
