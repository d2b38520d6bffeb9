//! Deterministic random streams.
//!
//! Every randomized driver takes a single `u64` seed. Independent workers
//! (restarts, trial indices) read from separate ChaCha streams of that seed,
//! so results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
