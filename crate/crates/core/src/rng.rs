//! Seeded random streams.
//!
//! Every stochastic component takes a `SimRng` built from a 64-bit seed. Child
//! seeds are derived by hashing `(root, role, index)` with SHA-256, so adding a
//! trial or a new role never shifts the streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable child seed for `role` and `index` under `root`.
pub fn derive_seed(root: u64, role: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"skillcomp/seed/v1");
    hasher.update(root.to_le_bytes());
    hasher.update((role.len() as u64).to_le_bytes());
    hasher.update(role.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

pub fn derive_rng(root: u64, role: &str, index: u64) -> SimRng {
    rng_from_seed(derive_seed(root, role, index))
}
