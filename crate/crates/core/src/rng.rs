//! Deterministic random streams.
//!
//! Every stochastic routine takes a caller-supplied `u64` seed and derives one
//! independent ChaCha8 stream per unit of work (user, trial, partition), so
//! results do not depend on how the work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator identifier recorded in simulation reports.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64, stream = work-unit index)";

pub type StreamRng = ChaCha8Rng;

/// The `stream`-th independent stream under `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes `(seed, index)` into a fresh seed (SplitMix64 finaliser). Used when a
/// work unit itself needs a whole family of streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
