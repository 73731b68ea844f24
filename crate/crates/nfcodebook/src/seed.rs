//! Counter-based seed derivation so results never depend on scheduling.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under `base`.
pub fn derive(base: u64, stream: u64, index: u64) -> u64 {
    mix(mix(mix(base) ^ stream) ^ index)
}

/// Named streams used by the simulators.
pub mod stream {
    pub const USERS: u64 = 1;
    pub const CHANNEL: u64 = 2;
    pub const RVQ: u64 = 3;
    pub const TRAINING: u64 = 4;
    pub const GAIN_RVQ: u64 = 5;
}
