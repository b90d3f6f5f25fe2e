//! Labeled deterministic randomness.
//!
//! Every consumer of randomness gets its own stream keyed by
//! `(master_seed, label, index)`, so results do not depend on the order in
//! which agents or threads happen to draw.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"psmm/rng-stream/v1";

/// A ChaCha20 stream derived from a master seed and a purpose label.
///
/// The stream counts how many 64-bit words it has produced; the privacy
/// auditor relies on that count to prove an operator drew no randomness.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha20Rng,
    draws: u64,
}

impl RngStream {
    pub fn derive(master_seed: u64, label: &str, index: u64) -> Self {
        let mut h = Sha256::new();
        h.update(DOMAIN);
        h.update(master_seed.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.update(index.to_le_bytes());
        let seed: [u8; 32] = h.finalize().into();
        Self {
            inner: ChaCha20Rng::from_seed(seed),
            draws: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Number of words drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}
