//! Named sub-seeds derived from one root seed.

use sha2::{Digest, Sha256};

/// Deterministic child seed for `(root, name, index)`.
pub fn sub_seed(root: u64, name: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(name.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Hex SHA-256 of arbitrary bytes; used to stamp artifacts.
pub fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
