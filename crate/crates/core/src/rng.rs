//! The crate's single source of randomness.
//!
//! Every stochastic routine draws from ChaCha20 seeded through
//! `SeedableRng::seed_from_u64`, and normal variates come from
//! `rand_distr::StandardNormal` (ziggurat). Both are platform independent,
//! so a seed pins results bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type TaggerRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> TaggerRng {
    ChaCha20Rng::seed_from_u64(seed)
}
