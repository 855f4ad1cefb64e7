//! Keyed random streams.
//!
//! Every stochastic entity draws from its own ChaCha8 stream whose seed is
//! SHA-256 over `(seed, domain, key, index)`. Adding or removing one entity
//! never shifts another entity's stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn stream(seed: u64, domain: &str, key: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [domain, key] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update(index.to_le_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Stream for a named pedestrian's controller.
pub fn pedestrian_stream(seed: u64, name: &str) -> ChaCha8Rng {
    stream(seed, "pedestrian", name, 0)
}
