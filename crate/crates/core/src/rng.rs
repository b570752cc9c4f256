//! Deterministic 64-bit PRNG (SplitMix64).
//!
//! Every stochastic choice in the crate (input sequences, weight inits) draws
//! from this generator so that a run is fully reproducible from its seed,
//! independent of platform and of any external crate's stream evolution.

use crate::scalar::Real;

/// SplitMix64 generator (Steele, Lea, Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    pub fn next_unit<T: Real>(&mut self) -> T {
        T::of((self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
    }

    /// Uniform draw in `[low, high)`.
    pub fn uniform<T: Real>(&mut self, low: T, high: T) -> T {
        low + (high - low) * self.next_unit()
    }

    /// Uniform draw in `0..bound`.
    pub fn next_index(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}
