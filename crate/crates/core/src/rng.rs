//! Seeded random streams.
//!
//! Every randomized computation takes an explicit generator. Independent
//! tasks (trials, grid cells) derive their own ChaCha stream from a master
//! seed and a task key, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `key` under `master_seed`.
pub fn stream(master_seed: u64, key: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(key);
    rng
}

/// Key for trial `trial` of grid cell `cell`.
pub fn cell_key(cell: usize, trial: usize) -> u64 {
    ((cell as u64) << 32) | (trial as u64 & 0xffff_ffff)
}
