//! Seeded, stream-indexed randomness.
//!
//! Every randomized operation takes either an explicit [`RngSeed`] or a
//! generator derived from one. Independent selection events draw from
//! independent streams (stream index = event index), so results do not
//! depend on evaluation order or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit seed. The same seed with the same inputs produces bit-identical
/// operator outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Generator for stream `index`. Streams with different indices never
    /// overlap.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// Child seed for a labelled sub-experiment (splitmix64 step).
    pub fn derive(self, label: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(label.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        RngSeed(z ^ (z >> 31))
    }
}
