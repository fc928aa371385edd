//! Reproducible random streams.
//!
//! Each stream is a ChaCha8 generator keyed by the master seed, with the
//! stream id selecting ChaCha's 64-bit stream counter. Streams with the same
//! key and different ids are independent, and a stream's output does not
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    /// Stream `index` inside the family `tag`. Tags keep the ensembles of one
    /// experiment (e.g. the two sides of a two-sample test) disjoint.
    pub fn tagged(master_seed: u64, tag: u32, index: u64) -> Self {
        debug_assert!(index < 1 << 32);
        RngStream::new(master_seed, ((tag as u64) << 32) | index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}
