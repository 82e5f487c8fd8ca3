//! Seeded edge-to-bucket hashing.
//!
//! One seed determines a whole family `h_0, h_1, ...`: the family index is
//! mixed into the key instead of re-seeding. Evaluation is a pure function
//! of `(seed, family_index, edge, m)`.
//!
//! Buckets are produced by a 64-bit avalanche mixer followed by
//! multiply-shift range reduction, whose bias is at most `m / 2^64`.

use crate::error::{Error, Result};
use crate::stream::Edge;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Maps a uniform 64-bit word to `0..m`.
#[inline]
pub fn reduce(x: u64, m: u32) -> u32 {
    ((u128::from(x) * u128::from(m)) >> 64) as u32
}

/// Derives an independent 64-bit word from a seed and two counters.
#[inline]
pub fn derive(seed: u64, a: u64, b: u64) -> u64 {
    let k = mix64(seed ^ mix64(a.wrapping_add(1).wrapping_mul(GOLDEN)));
    mix64(k ^ mix64(b.wrapping_add(0x632b_e59b_d9b4_e019)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamily {
    seed: u64,
    buckets: u32,
}

impl HashFamily {
    pub fn new(seed: u64, buckets: u32) -> Result<Self> {
        if buckets < 2 {
            return Err(Error::config(format!("bucket count must be at least 2, got {buckets}")));
        }
        Ok(HashFamily { seed, buckets })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn buckets(&self) -> u32 {
        self.buckets
    }

    /// Per-member key; hoist out of hot loops with [`Self::bucket_with`].
    #[inline]
    pub fn member_key(&self, family_index: u32) -> u64 {
        mix64(self.seed ^ mix64(u64::from(family_index).wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn bucket_with(&self, member_key: u64, edge: Edge) -> u32 {
        let x = mix64(edge.key() ^ member_key);
        reduce(mix64(x ^ member_key.rotate_left(29)), self.buckets)
    }

    /// Bucket of `edge` under family member `family_index`.
    #[inline]
    pub fn bucket(&self, family_index: u32, edge: Edge) -> u32 {
        self.bucket_with(self.member_key(family_index), edge)
    }
}

/// Free-function form of [`HashFamily::bucket`].
pub fn hash_edge(family: &HashFamily, family_index: u32, edge: Edge) -> u32 {
    family.bucket(family_index, edge)
}
