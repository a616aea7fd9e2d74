//! Deterministic derivation of independent RNG streams from one base seed.
//!
//! Every stochastic component (scene generation, channel distortion, key
//! providers, game trials, Monte-Carlo runs) draws from its own stream so
//! that parallel runs stay reproducible and uncorrelated.

/// SplitMix64 finalizer. Stable; never change it, recorded seeds depend on it.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for stream (`domain`, `index`) of `base`.
pub fn mix(base: u64, domain: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(domain ^ splitmix64(index)))
}

/// Stream domains. One per stochastic component.
pub mod domain {
    pub const SCENE: u64 = 1;
    pub const CHANNEL: u64 = 2;
    pub const PROVIDER: u64 = 3;
    pub const GAME: u64 = 4;
    pub const RUN: u64 = 5;
    /// Per-frame distortion inside one channel stream.
    pub const FRAME: u64 = 6;
    /// Per-point axis hashing in parameter sweeps.
    pub const AXES: u64 = 7;
}
