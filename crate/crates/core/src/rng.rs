//! Seed-derived random streams.
//!
//! Every path gets its own ChaCha stream selected by path index, so results
//! never depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    master_seed: u64,
}

impl StreamFactory {
    pub fn new(master_seed: u64) -> Self {
        StreamFactory { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Independent stream for path `index`.
    pub fn substream(&self, index: u64) -> PathRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }

    /// A factory for an unrelated experiment keyed by `label`, e.g. one check
    /// of the validation battery.
    pub fn derive(&self, label: u64) -> StreamFactory {
        StreamFactory::new(splitmix64(self.master_seed ^ splitmix64(label)))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
