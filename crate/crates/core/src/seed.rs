//! Counter-based per-trial random streams.
//!
//! Every trial draws from a ChaCha8 stream selected by `(master_seed, purpose, index)`,
//! so results do not depend on how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Stream purposes. Distinct purposes never share a stream for the same master seed.
pub mod purpose {
    pub const NETWORK: u64 = 1;
    pub const TREE_PRIMARY: u64 = 2;
    pub const TREE_SECONDARY: u64 = 3;
    pub const EDGES: u64 = 4;
    pub const AUXILIARY: u64 = 5;
    pub const AUXILIARY_SECONDARY: u64 = 6;
    pub const WALK: u64 = 7;
    pub const CROSS_EDGES: u64 = 8;
}

const INDEX_BITS: u32 = 40;

pub fn trial_rng(master_seed: u64, purpose: u64, index: u64) -> TrialRng {
    assert!(index < (1 << INDEX_BITS), "trial index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((purpose << INDEX_BITS) | index);
    rng
}
