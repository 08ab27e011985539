//! Sub-seed derivation.
//!
//! Every stage draws from its own ChaCha8 stream whose 64-bit seed is
//! `splitmix64(seed ^ fnv1a64(label))`. Labels are stage names
//! (`"docvec"`, `"elm"`, ...) or composite keys such as `doc_id` plus a
//! mention index, so results never depend on processing order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(label.as_bytes()))
}

/// Seed for one indexed item under a label, e.g. the n-th mention of a document.
pub fn derive_indexed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive(seed, label) ^ splitmix64(index))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), FNV_OFFSET);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn labels_separate_streams() {
        assert_ne!(derive(1, "docvec"), derive(1, "elm"));
        assert_ne!(derive_indexed(1, "d", 0), derive_indexed(1, "d", 1));
        assert_eq!(derive(9, "x"), derive(9, "x"));
    }
}
