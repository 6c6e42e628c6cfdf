//! Seeded random number generation.
//!
//! Every random choice in the crate goes through a ChaCha8 stream so results
//! are identical across platforms and library upgrades.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
