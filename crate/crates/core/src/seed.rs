//! Seed derivation.
//!
//! Every random stream in an experiment is derived from one master seed by
//! a counter-based scheme built on the SplitMix64 finaliser:
//!
//! ```text
//! trial_seed(master, t)        = mix(master + (t + 1) * GOLDEN)
//! stream_seed(seed, tag, index) = mix(mix(seed ^ tag) + (index + 1) * GOLDEN)
//! ```
//!
//! where `GOLDEN = 0x9E3779B97F4A7C15` and `tag` is one of the [`Stream`]
//! constants. Each derived seed keys a ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent purposes a trial draws randomness for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 0x4752_4150_4800_0001,
    Sources = 0x5352_4353_0000_0002,
    Payload = 0x5041_594C_0000_0003,
    Protocol = 0x5052_4F54_0000_0004,
    Query = 0x5155_4552_5900_0005,
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    mix(master.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn stream_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    mix(mix(seed ^ stream as u64).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng_from(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> SimRng {
    rng_from(stream_seed(seed, stream, index))
}
