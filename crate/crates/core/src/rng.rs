//! Seeded counter-based random streams.
//!
//! ChaCha is a counter-mode generator: `(seed, stream)` names an independent
//! keystream, so every consumer derives its own stream instead of sharing
//! one mutable generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// Stream ids reserved per consumer so that, e.g., the layout sampler and the
// random initializer never draw from the same keystream.
pub(crate) const STREAM_INIT: u64 = 1 << 40;
pub(crate) const STREAM_LAYOUT: u64 = 2 << 40;
pub(crate) const STREAM_SURROGATE: u64 = 3 << 40;
