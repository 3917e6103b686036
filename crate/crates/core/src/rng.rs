//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed and draws from a
//! [`ChaCha8Rng`]. Independent sub-streams (one per sweep grid point or per
//! Monte Carlo shard) are derived with [`mix_seed`], so results never depend
//! on how work is spread across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer applied to `base ^ golden * (index + 1)`.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
