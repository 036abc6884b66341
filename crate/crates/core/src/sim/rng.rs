//! Deterministic random streams.
//!
//! All randomness comes from ChaCha8, a counter-based generator. A root seed
//! selects the key and each `(index, role, shot)` triple selects one of its
//! 2^64 independent streams, so any stream can be regenerated in isolation
//! and parallel generation does not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Template = 1,
    Original = 2,
    Fake = 3,
    /// Per-channel draws of the theory-vs-simulation experiment.
    Channel = 4,
    /// Codebook presets and classifier shuffles.
    Aux = 5,
}

pub type SimRng = ChaCha8Rng;

/// Stream `(index, role, shot)` of the generator keyed by `root_seed`.
///
/// Indices must stay below 2^40 and shots below 2^16.
pub fn stream(root_seed: u64, index: u64, role: Role, shot: u32) -> SimRng {
    debug_assert!(index < 1 << 40 && shot < 1 << 16);
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream((index << 24) | ((role as u64) << 16) | u64::from(shot));
    rng
}

/// SplitMix64 finalizer, used to rank items by a seeded hash.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
