use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// Number of sinusoids per input channel.
pub const DEFAULT_TONES: usize = 100;
/// Frequencies are drawn uniformly from `[−500, 500]` rad/s.
pub const DEFAULT_FREQUENCY_RANGE: f64 = 500.0;
pub const DEFAULT_AMPLITUDE: f64 = 0.5;

/// Sum-of-sinusoids excitation `ν(t) = a Σᵢ sin(ωᵢ t)`, one independent
/// frequency set per input channel. Frequencies are fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationSignal {
    amplitude: f64,
    /// one row of frequencies per channel
    frequencies: Vec<Vec<f64>>,
}

impl ExplorationSignal {
    pub fn new(seed: u64, channels: usize) -> Self {
        Self::with_settings(
            seed,
            channels,
            DEFAULT_TONES,
            DEFAULT_FREQUENCY_RANGE,
            DEFAULT_AMPLITUDE,
        )
    }

    pub fn with_settings(seed: u64, channels: usize, tones: usize, range: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frequencies = (0..channels)
            .map(|_| (0..tones).map(|_| rng.random_range(-range..=range)).collect())
            .collect();
        Self {
            amplitude,
            frequencies,
        }
    }

    pub fn channels(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[Vec<f64>] {
        &self.frequencies
    }

    /// Upper bound on `|ν(t)|` per channel.
    pub fn bound(&self) -> f64 {
        self.amplitude * self.frequencies.first().map_or(0, Vec::len) as f64
    }

    pub fn value<T: Real>(&self, t: T) -> Vec<T> {
        let t = t.to_f64().unwrap_or(f64::NAN);
        self.frequencies
            .iter()
            .map(|w| T::lit(self.amplitude * w.iter().map(|&wi| (wi * t).sin()).sum::<f64>()))
            .collect()
    }
}

/// Single-input excitation value at time `t` for a given seed.
pub fn exploration_signal<T: Real>(t: T, seed: u64) -> Vec<T> {
    ExplorationSignal::new(seed, 1).value(t)
}
