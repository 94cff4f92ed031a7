use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed handle for every randomized operation.
///
/// Streams are ChaCha8 generators keyed through `seed_from_u64`, so the
/// output depends only on the 64-bit seed and not on platform or word size.
/// Independent sub-streams are derived with [`SeededRng::fork`], which mixes
/// the parent seed with a stream label using the SplitMix64 finalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRng {
    seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent child seed for `stream`.
    pub fn fork(&self, stream: u64) -> SeededRng {
        SeededRng {
            seed: splitmix64(self.seed ^ splitmix64(stream.wrapping_add(0x5353_435f_5354_524d))),
        }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
