//! Seed fan-out. One master seed yields one independent stream per
//! (day, agent) so adding an agent never shifts anyone else's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn day_seed(master: u64, day: u32) -> u64 {
    master ^ day as u64
}

pub fn mix(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    SimRng::seed_from_u64(mix(seed, stream_id))
}

/// Stream ids at or above this are reserved for non-agent randomness.
pub const RESERVED_STREAM: u64 = 1 << 40;
pub const FUNDAMENTAL_STREAM: u64 = RESERVED_STREAM;
pub const DATASET_STREAM: u64 = RESERVED_STREAM + 1;
