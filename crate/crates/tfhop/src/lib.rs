//! Decentralized time-frequency scheduling for mutually interfering FMCW radars.
//!
//! Radars pick joint (subband, time-slot) actions per chirp, observe their own
//! SINR, and update mixed strategies with bandit no-regret learners. The crate
//! covers signal synthesis, range-Doppler processing, the learners, regret
//! oracles and the experiment driver.

// NaN-rejecting validation reads more directly as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod learning;
pub mod model;
pub mod rd;
pub mod scheduler;
pub mod waveform;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded generator used everywhere in the crate.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent sub-seed (splitmix64 finalizer).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
