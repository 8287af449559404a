//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), which
//! produces the same stream for a given seed on every platform. Independent
//! consumers of one run seed get separate ChaCha streams, so adding draws in
//! one place (say, dropout masks) never shifts another (say, weight init).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used within a single training run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Split = 0,
    Init = 1,
    Shuffle = 2,
    Dropout = 3,
    AutoencoderInit = 4,
    AutoencoderShuffle = 5,
    AutoencoderDropout = 6,
    Validation = 7,
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
