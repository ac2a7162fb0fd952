//! Small, platform-stable hashing primitives.
//!
//! Vertex ids, refinement colors and derived seeds must not depend on the
//! std hasher (whose algorithm is unspecified), so everything that feeds a
//! persisted or compared value goes through [`StableHasher`].

use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hash, Hasher};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-dependent combination of two words.
#[inline]
pub fn combine(a: u64, b: u64) -> u64 {
    mix64(a.rotate_left(23) ^ b.wrapping_add(GOLDEN))
}

#[derive(Clone, Copy)]
pub struct StableHasher {
    state: u64,
}

impl Default for StableHasher {
    fn default() -> Self {
        StableHasher { state: 0x243F_6A88_85A3_08D3 }
    }
}

impl StableHasher {
    pub fn with_seed(seed: u64) -> Self {
        StableHasher { state: mix64(seed ^ 0x243F_6A88_85A3_08D3) }
    }
}

impl Hasher for StableHasher {
    #[inline]
    fn finish(&self) -> u64 {
        mix64(self.state)
    }

    fn write(&mut self, bytes: &[u8]) {
        let mut chunks = bytes.chunks_exact(8);
        for c in &mut chunks {
            self.write_u64(u64::from_le_bytes(c.try_into().unwrap()));
        }
        let rest = chunks.remainder();
        if !rest.is_empty() {
            let mut buf = [0u8; 8];
            buf[..rest.len()].copy_from_slice(rest);
            self.write_u64(u64::from_le_bytes(buf) ^ ((rest.len() as u64) << 56));
        }
    }

    #[inline]
    fn write_u64(&mut self, x: u64) {
        // Full avalanche per word: a multiply-rotate step lets short integer
        // vectors collide.
        self.state = mix64(self.state ^ x).wrapping_add(GOLDEN);
    }

    #[inline]
    fn write_u32(&mut self, x: u32) {
        self.write_u64(x as u64)
    }

    #[inline]
    fn write_u8(&mut self, x: u8) {
        self.write_u64(x as u64)
    }

    #[inline]
    fn write_usize(&mut self, x: usize) {
        self.write_u64(x as u64)
    }

    #[inline]
    fn write_i64(&mut self, x: i64) {
        self.write_u64(x as u64)
    }
}

pub type StableBuild = BuildHasherDefault<StableHasher>;
pub type StableMap<K, V> = HashMap<K, V, StableBuild>;
pub type StableSet<K> = HashSet<K, StableBuild>;

pub fn stable_hash<T: Hash + ?Sized>(value: &T) -> u64 {
    let mut h = StableHasher::default();
    value.hash(&mut h);
    h.finish()
}

pub fn seeded_hash<T: Hash + ?Sized>(seed: u64, value: &T) -> u64 {
    let mut h = StableHasher::with_seed(seed);
    value.hash(&mut h);
    h.finish()
}

/// Maps a hash to a uniform value in `[0, 1)`.
#[inline]
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_are_reproducible() {
        assert_eq!(stable_hash(&(1u64, 2i64)), stable_hash(&(1u64, 2i64)));
        assert_ne!(stable_hash(&(1u64, 2i64)), stable_hash(&(2u64, 1i64)));
        assert_ne!(seeded_hash(1, &7u64), seeded_hash(2, &7u64));
    }

    #[test]
    fn unit_interval_is_bounded() {
        assert_eq!(unit_interval(0), 0.0);
        assert!(unit_interval(u64::MAX) < 1.0);
    }
}
