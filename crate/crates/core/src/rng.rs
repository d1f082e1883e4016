//! Deterministic random substreams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by
//! `(seed, purpose)` and selected by `index` (a path or pair number), so a
//! result never depends on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Starting value and increments of a driving path.
    Driver = 1,
    /// The uniform draw behind a switch time.
    Switch = 2,
    /// Discrete chain trajectories.
    Chain = 3,
    /// Samples used to calibrate statistical tests.
    Calibration = 4,
}

/// `(seed, index)` identifying one independent path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathSeed {
    pub seed: u64,
    pub index: u64,
}

impl PathSeed {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn rng(&self, purpose: Purpose) -> ChaCha8Rng {
        substream(self.seed, self.index, purpose)
    }
}

/// ChaCha8 generator for `(seed, index, purpose)`.
pub fn substream(seed: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
