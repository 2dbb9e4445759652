//! Seeded random substreams.
//!
//! Every stochastic stage draws from its own ChaCha stream derived from a base
//! seed and a path of indices, so results do not depend on execution order or
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream labels keep unrelated draws apart when they share indices.
pub mod stream {
    pub const SCENE: u64 = 0x5343_454e;
    pub const WAVEFORM: u64 = 0x5741_5645;
    pub const PHASES: u64 = 0x5048_4153;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const TRIAL: u64 = 0x5452_4941;
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives a child seed from `seed` and a path of indices.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn substream(seed: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive(seed, path))
}
