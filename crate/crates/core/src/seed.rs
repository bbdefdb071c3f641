//! Deterministic seed derivation.
//!
//! Every random stream is derived from one root seed by hashing a path of
//! labels (subcommand, run index, purpose) with FNV-1a and mixing the result
//! into the parent seed with SplitMix64. Child streams are independent of the
//! order in which they are requested.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// A node in the seed hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self(root)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child node for a named branch.
    pub fn child(self, label: &str) -> Self {
        Self(splitmix64(self.0 ^ fnv1a(label.as_bytes())))
    }

    /// Child node for a numbered branch such as a run index.
    pub fn index(self, i: u64) -> Self {
        Self(splitmix64(splitmix64(self.0 ^ 0x5eed) ^ i))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
