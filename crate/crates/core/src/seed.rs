//! Master-seed fan-out.
//!
//! Every stochastic component draws from its own ChaCha stream whose seed is
//! derived from the master seed, a component label and an index. The rule is
//! fixed so that re-running one ensemble member reproduces it exactly:
//!
//! `seed = splitmix64(master ^ fnv1a64(label) ^ splitmix64(index))`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Human-readable form of the derivation rule, echoed into run manifests.
pub const SPLIT_RULE: &str = "splitmix64(master ^ fnv1a64(label) ^ splitmix64(index))";

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn derive(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(master ^ fnv1a64(label) ^ splitmix64(index))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_label_sensitive() {
        assert_eq!(derive(7, "rc", 0), derive(7, "rc", 0));
        assert_ne!(derive(7, "rc", 0), derive(7, "rc", 1));
        assert_ne!(derive(7, "rc", 0), derive(7, "fhn", 0));
        assert_ne!(derive(7, "rc", 0), derive(8, "rc", 0));
    }

    #[test]
    fn fnv_reference_value() {
        // FNV-1a 64 of the empty string is the offset basis.
        assert_eq!(fnv1a64(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64("a"), 0xaf63_dc4c_8601_ec8c);
    }
}
