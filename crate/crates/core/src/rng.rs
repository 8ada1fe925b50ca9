//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived from
//! the master seed, so enabling one component (say, discriminator sampling)
//! never perturbs the draws seen by another (say, batch shuffling).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used across the crate.
pub mod streams {
    pub const GENERATOR_INIT: u64 = 1;
    pub const DISCRIMINATOR_INIT: u64 = 2;
    pub const PRETRAIN: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const FAKES: u64 = 5;
    pub const REINFORCE: u64 = 6;
    pub const EVAL: u64 = 7;
    pub const SYNTHETIC: u64 = 8;
    pub const SAMPLING: u64 = 9;
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for worker `index` of a fan-out derived from `(seed, stream)`.
pub fn substream(seed: u64, stream: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}
