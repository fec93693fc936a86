//! Pinned, portable random streams.
//!
//! Every random draw in a run comes from a ChaCha8 stream keyed by
//! (master seed, purpose label, step, robot). Streams are independent and
//! order-insensitive: the same (seed, label, step, robot) always yields the
//! same sequence, regardless of what was drawn before.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamLabel {
    Init = 1,
    Sched = 2,
    Visibility = 3,
    Motion = 4,
    KDraw = 5,
    Sweep = 6,
}

pub fn substream(master_seed: u64, label: StreamLabel, step: u64, robot: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(label as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&step.to_le_bytes());
    seed[24..32].copy_from_slice(&robot.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}
