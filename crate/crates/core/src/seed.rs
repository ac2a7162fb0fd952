//! Seed splitting.
//!
//! `derive_seed(master, i) = mix64(mix64(master) + (i + 1) * GOLDEN)` where
//! `mix64` is the splitmix64 finalizer and `GOLDEN = 0x9E3779B97F4A7C15`.
//! This is splitmix64's counter mode started from a scrambled master: for a
//! fixed master it is injective in `i`, and the formula will not change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hash::mix64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn derive_seed(master: u64, replica: u64) -> u64 {
    mix64(mix64(master).wrapping_add(replica.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// The generator used for replica `replica` of a run seeded with `master`.
pub fn replica_rng(master: u64, replica: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, replica))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::StableSet;

    #[test]
    fn no_collisions_over_a_million_replicas() {
        let mut seen: StableSet<u64> = StableSet::default();
        for i in 0..1_000_000 {
            assert!(seen.insert(derive_seed(12345, i)));
        }
    }

    #[test]
    fn master_changes_every_seed() {
        for i in 0..1000 {
            assert_ne!(derive_seed(1, i), derive_seed(2, i));
            assert_eq!(derive_seed(1, i), derive_seed(1, i));
        }
        // Avalanche spot check: one master bit flips about half the output bits.
        let flips: u32 = (0..64).map(|i| (derive_seed(0, i) ^ derive_seed(1 << 17, i)).count_ones()).sum();
        assert!((1800..2300).contains(&flips), "{flips}");
    }
}
