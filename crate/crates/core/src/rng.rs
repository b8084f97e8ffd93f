//! Counter-based random number streams.
//!
//! Every Gaussian draw is keyed by `(master_seed, path_index, step_index)`,
//! so a path step always sees the same randomness regardless of execution
//! order or thread scheduling. Independent copies of the driving motion
//! (the `V` paths of the bridge construction) live in a disjoint stream
//! namespace obtained by offsetting the path index.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;

/// Path-index offset for the independent `V` namespace.
pub const V_PATH_OFFSET: u64 = 1 << 40;

/// A deterministic stream keyed by master seed and a (path, step) counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub path_index: u64,
    pub step_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, path_index: u64, step_index: u64) -> Self {
        Self {
            master_seed,
            path_index,
            step_index,
        }
    }

    /// The generator for this counter value. Re-keying per step keeps the
    /// draws a pure function of the key.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = splitmix(self.master_seed ^ 0x9e37_79b9_7f4a_7c15);
        state = splitmix(state ^ self.path_index);
        state = splitmix(state ^ self.step_index);
        let mut word = state;
        for chunk in key.chunks_mut(8) {
            word = splitmix(word);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }

    pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
        rng.sample(StandardNormal)
    }
}

fn splitmix(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic matrix with i.i.d. standard complex Gaussian entries,
/// used for Haar rotations and as random test input.
pub fn test_ginibre(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = RngStream::new(seed, 0, 0).rng();
    ComplexMatrix::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / 2.0_f64.sqrt()
    })
}
