//! Counter-based randomness.
//!
//! Every draw is addressed by `(root_seed, purpose, batch, cube serial, draw)`.
//! The first four select a ChaCha8 stream; the draw index is the position in
//! that stream. Streams never depend on evaluation order, so serial and
//! parallel runs produce the same samples.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for; keeps arm and noise draws of one cube apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Arms = 1,
    Noise = 2,
    Finish = 3,
    FinishNoise = 4,
    Estimate = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    root_seed: u64,
}

impl RandomSource {
    pub fn new(root_seed: u64) -> Self {
        Self { root_seed }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    /// Stream for one `(purpose, batch, serial)` cell.
    pub fn stream(&self, purpose: Purpose, batch: u64, serial: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        let id = mix(mix(mix(purpose as u64) ^ batch) ^ serial.rotate_left(29));
        rng.set_stream(id);
        Stream { rng }
    }
}

/// A sequential reader over one stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Jump to draw `index` (each uniform consumes two 32-bit words).
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(index as u128 * 2);
    }

    pub fn rng(&mut self) -> &mut impl RngCore {
        &mut self.rng
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
