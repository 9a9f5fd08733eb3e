//! Named random streams derived from a single master seed.
//!
//! Every consumer of randomness asks for its own stream by name
//! (`"split/3"`, `"selection/2"`, ...). Streams are independent of each other
//! and of evaluation order, so adding a system or running work in parallel
//! never perturbs another consumer's draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Returns the generator for `name` under `master_seed`.
pub fn stream(master_seed: u64, name: &str) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(seed)
}

/// Derives a child seed, for APIs that take a plain `u64`.
pub fn derive_seed(master_seed: u64, name: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
