//! Exponentially correlated Gaussian profit shock.
//!
//! The shock is an Ornstein-Uhlenbeck process sampled exactly on the
//! integration grid:
//!
//! ```text
//! xi[n+1] = a * xi[n] + sigma * sqrt(1 - a^2) * z[n],   a = exp(-dt / tau)
//! ```
//!
//! with `z[n]` i.i.d. standard normal. The first value is drawn from the
//! stationary law N(0, sigma^2), so the series is stationary from the start
//! with lag-`d` autocorrelation `exp(-d / tau)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::SimConfig;

#[derive(Debug, Clone)]
pub struct NoiseState {
    xi: f64,
    decay: f64,
    innovation_scale: f64,
    rng: ChaCha8Rng,
}

impl NoiseState {
    pub fn new(seed: u64, cfg: &SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let decay = (-cfg.dt / cfg.tau_xi).exp();
        let z: f64 = StandardNormal.sample(&mut rng);
        Self {
            xi: cfg.sigma_xi * z,
            decay,
            innovation_scale: cfg.sigma_xi * (1.0 - decay * decay).sqrt(),
            rng,
        }
    }

    /// Current shock value.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Advances the shock by one integration step and returns the new value.
    pub fn step(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.xi = self.decay * self.xi + self.innovation_scale * z;
        self.xi
    }
}

/// SplitMix64 finalizer. Derives a decorrelated seed from `seed`, so one
/// user-facing seed can feed several independent streams.
pub fn mix_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
