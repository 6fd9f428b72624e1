//! Seeded random streams.
//!
//! Every consumer of randomness in a trial gets its own ChaCha stream keyed
//! by `(seed, stream id)`, so adding draws to one stage never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub const SCENE_STREAM: u64 = 0;
pub const SIGNAL_STREAM: u64 = 1;
pub const NOISE_STREAM: u64 = 2;
pub const DIRECTION_STREAM: u64 = 3;

pub fn stream(seed: u64, id: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
