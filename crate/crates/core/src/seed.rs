//! Per-purpose seed derivation from a single master seed.
//!
//! `derive(master, label, indices)` is the first 8 bytes (little endian) of
//! SHA-256 over `master (u64 LE) || label || 0x00 || index_0 (u64 LE) || ...`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive(master: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    h.update([0u8]);
    for i in indices {
        h.update(i.to_le_bytes());
    }
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable integer key for a weight in grams (milligram resolution).
pub fn weight_key(grams: f64) -> u64 {
    (grams * 1000.0).round() as i64 as u64
}
