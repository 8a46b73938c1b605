//! Reproducible stream derivation.
//!
//! Every randomized routine takes a `u64` master seed and derives independent
//! substreams from `(master, label, indices)` by hashing the triple with
//! SHA-256 into a ChaCha12 seed. Streams are therefore independent of
//! execution order and of how work is split across workers: replication `i`
//! of command `c` always sees the same generator, whether it runs first,
//! last, or on another thread.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derive a fresh 64-bit master seed for a nested pipeline stage.
pub fn substream_seed(master: u64, label: &str, indices: &[u64]) -> u64 {
    use rand::Rng;
    stream(master, label, indices).gen()
}

/// Derive the deterministic generator for `(master, label, indices)`.
pub fn stream(master: u64, label: &str, indices: &[u64]) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update([label.len() as u8]);
    h.update(label.as_bytes());
    for ix in indices {
        h.update(ix.to_le_bytes());
    }
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}
