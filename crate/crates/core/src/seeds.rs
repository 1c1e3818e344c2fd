//! Seed derivation for paired trials.
//!
//! Every random stream in a trial is keyed off `(master_seed, trial)` plus a
//! purpose tag, so that all strategy arms of the same trial see the identical
//! catalog, pool, and oracle (structure *and* noise stream) while streams for
//! different purposes stay statistically independent. Selection randomness is
//! the only stream that may differ between arms, and only because the arms
//! consume it differently.

/// Purpose tags; each independent stream in a trial gets its own.
pub mod tag {
    pub const CATALOG: u64 = 0x43_41_54_41_4c_4f_47; // "CATALOG"
    pub const POOL: u64 = 0x50_4f_4f_4c; // "POOL"
    pub const ORACLE_STRUCTURE: u64 = 0x4f_52_41_43_4c_45_53; // "ORACLES"
    pub const ORACLE_NOISE: u64 = 0x4f_52_41_43_4c_45_4e; // "ORACLEN"
    pub const ENSEMBLE: u64 = 0x45_4e_53_45_4d_42_4c_45; // "ENSEMBLE"
    pub const SELECTION: u64 = 0x53_45_4c_45_43_54; // "SELECT"
}

/// splitmix64 finalizer over `seed ^ scramble(tag)`; cheap, well-mixed, and
/// stable across platforms. Used for all seed derivation in the crate.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial's world. Strategy is deliberately absent: all arms of a
/// trial share the same world.
pub fn trial_seed(master_seed: u64, trial: u32) -> u64 {
    mix(master_seed, 0x5452_4941_4c00_0000 ^ u64::from(trial)) // "TRIAL" prefix
}

/// Stream seed for one purpose within a trial.
pub fn stream_seed(master_seed: u64, trial: u32, purpose: u64) -> u64 {
    mix(trial_seed(master_seed, trial), purpose)
}
