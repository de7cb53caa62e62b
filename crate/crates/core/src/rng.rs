//! Deterministic random streams keyed by `(seed, trial_index)`.
//!
//! Each trial owns a ChaCha8 stream: the seed fixes the key and the trial
//! index selects the stream, so trial `k` draws the same numbers whether
//! trials run serially or on any number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct PhaseStream {
    rng: ChaCha8Rng,
}

impl PhaseStream {
    pub fn new(seed: u64, trial_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial_index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        let p = self.uniform() * std::f64::consts::TAU;
        if p >= std::f64::consts::TAU {
            0.0
        } else {
            p
        }
    }
}

/// SplitMix64 finalizer, used to derive independent seeds from a base seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
