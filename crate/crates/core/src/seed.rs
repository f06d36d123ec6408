//! Stable seed derivation.
//!
//! Every random stream in a run is keyed off the master seed plus a short
//! label path, so adding a dataset or a client never shifts the draws seen by
//! another one. SHA-256 keeps the mapping stable across platforms and
//! toolchain versions (unlike `DefaultHasher`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// One component of a seed path.
#[derive(Debug, Clone, Copy)]
pub enum SeedPart<'a> {
    Num(u64),
    Tag(&'a str),
}

impl From<u64> for SeedPart<'_> {
    fn from(v: u64) -> Self {
        SeedPart::Num(v)
    }
}

impl From<usize> for SeedPart<'_> {
    fn from(v: usize) -> Self {
        SeedPart::Num(v as u64)
    }
}

impl<'a> From<&'a str> for SeedPart<'a> {
    fn from(v: &'a str) -> Self {
        SeedPart::Tag(v)
    }
}

/// Hash `(root, parts...)` into a new 64-bit seed.
pub fn derive_seed(root: u64, parts: &[SeedPart<'_>]) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    for part in parts {
        match part {
            SeedPart::Num(v) => {
                h.update([0u8]);
                h.update(v.to_le_bytes());
            }
            SeedPart::Tag(s) => {
                h.update([1u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
        }
    }
    let digest = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}

/// The generator used for every stream in the crate.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
