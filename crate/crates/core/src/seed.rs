//! Seed derivation for ensemble members.
//!
//! Every realization index `r` gets its own 64-bit seed, computed from the
//! experiment's base seed alone. The mapping does not depend on the step size,
//! the color parameter or the order in which cells are scheduled, so a given
//! `(base_seed, r)` always names the same coefficient stream.
//!
//! | constant             | value                   |
//! |----------------------|-------------------------|
//! | golden-ratio stride  | `0x9E37_79B9_7F4A_7C15` |
//! | first mix multiplier | `0xBF58_476D_1CE4_E5B9` |
//! | second mix multiplier| `0x94D0_49BB_1331_11EB` |
//!
//! These are the SplitMix64 finalizer constants.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 avalanche of a single word.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
    z ^ (z >> 31)
}

/// Seed for ensemble member `realization` of an experiment seeded with `base_seed`.
pub fn realization_seed(base_seed: u64, realization: u64) -> u64 {
    splitmix64(base_seed ^ realization.wrapping_mul(GOLDEN_GAMMA))
}
