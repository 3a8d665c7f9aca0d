//! Brownian increments from a counter-based generator.
//!
//! Every standard normal draw is addressed by the key
//! `(seed, stream, path, step, mode)`: `seed` and `stream` form the ChaCha
//! key, `path` selects the ChaCha stream, and `(step, mode)` selects a fixed
//! four-word slot in the keystream. A draw therefore never depends on how
//! many other draws were made before it, which keeps Monte Carlo results
//! identical across worker counts and scheduling orders.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream used by coupled `(u, v)` path pairs.
pub const STREAM_COUPLED: u64 = 0;
/// Stream for the unscaled small-time sample of the scaling check.
pub const STREAM_SCALING_BASE: u64 = 1;
/// Stream for the rescaled sample of the scaling check.
pub const STREAM_SCALING_SCALED: u64 = 2;

const WORDS_PER_DRAW: u128 = 4;

fn keyed_rng(seed: u64, stream: u64, path: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..].copy_from_slice(b"sclaw-noise-path");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(path);
    rng
}

// Box–Muller on exactly two 64-bit words.
fn normal_from_words(a: u64, b: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) + 1) as f64 * SCALE; // (0, 1]
    let u2 = (b >> 11) as f64 * SCALE; // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Counter-addressed identity of one noise path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub seed: u64,
    pub stream: u64,
    pub path: u64,
}

impl NoiseKey {
    pub fn new(seed: u64, stream: u64, path: u64) -> Self {
        Self { seed, stream, path }
    }

    /// Standard normal draw for `(step, mode)` of a `modes`-mode path.
    pub fn standard_normal(&self, step: usize, mode: usize, modes: usize) -> f64 {
        let mut rng = keyed_rng(self.seed, self.stream, self.path);
        rng.set_word_pos((step * modes + mode) as u128 * WORDS_PER_DRAW);
        let a = rng.next_u64();
        let b = rng.next_u64();
        normal_from_words(a, b)
    }
}

/// Per-step, per-mode Brownian increments `Δβₖ(n)` with variance `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    dt: f64,
    modes: usize,
    increments: Vec<f64>,
}

impl NoisePath {
    pub fn generate(key: NoiseKey, steps: usize, modes: usize, dt: f64) -> Self {
        let mut rng = keyed_rng(key.seed, key.stream, key.path);
        let sd = dt.sqrt();
        // Sequential reads visit the slots in (step, mode) order, matching
        // the random-access layout of `NoiseKey::standard_normal`.
        let increments = (0..steps * modes)
            .map(|_| {
                let a = rng.next_u64();
                let b = rng.next_u64();
                sd * normal_from_words(a, b)
            })
            .collect();
        Self {
            dt,
            modes,
            increments,
        }
    }

    pub fn zeros(steps: usize, modes: usize, dt: f64) -> Self {
        Self {
            dt,
            modes,
            increments: vec![0.0; steps * modes],
        }
    }

    pub fn from_increments(increments: Vec<f64>, modes: usize, dt: f64) -> Self {
        assert!(modes == 0 || increments.len() % modes == 0);
        Self {
            dt,
            modes,
            increments,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn steps(&self) -> usize {
        if self.modes == 0 {
            usize::MAX
        } else {
            self.increments.len() / self.modes
        }
    }

    pub fn increments(&self, step: usize) -> &[f64] {
        &self.increments[step * self.modes..(step + 1) * self.modes]
    }

    /// Path on a grid `factor` times coarser: increments summed in blocks.
    pub fn coarsen(&self, factor: usize) -> NoisePath {
        assert!(factor >= 1 && self.steps() % factor == 0);
        let k = self.modes;
        let coarse_steps = self.steps() / factor;
        let mut increments = vec![0.0; coarse_steps * k];
        for n in 0..coarse_steps {
            for f in 0..factor {
                let fine = self.increments(n * factor + f);
                for m in 0..k {
                    increments[n * k + m] += fine[m];
                }
            }
        }
        NoisePath {
            dt: self.dt * factor as f64,
            modes: k,
            increments,
        }
    }

    /// `βₖ` at every step boundary, starting from `βₖ(0) = 0`.
    pub fn brownian(&self, mode: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps() + 1);
        let mut b = 0.0;
        out.push(b);
        for n in 0..self.steps() {
            b += self.increments(n)[mode];
            out.push(b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let key = NoiseKey::new(7, STREAM_COUPLED, 3);
        let dt = 0.01;
        let path = NoisePath::generate(key, 50, 3, dt);
        for &(n, k) in &[(0, 0), (0, 2), (17, 1), (49, 2)] {
            let z = key.standard_normal(n, k, 3);
            assert_eq!(path.increments(n)[k], dt.sqrt() * z);
        }
    }

    #[test]
    fn keys_separate_streams() {
        let a = NoiseKey::new(1, 0, 0).standard_normal(0, 0, 1);
        let b = NoiseKey::new(1, 1, 0).standard_normal(0, 0, 1);
        let c = NoiseKey::new(1, 0, 1).standard_normal(0, 0, 1);
        let d = NoiseKey::new(2, 0, 0).standard_normal(0, 0, 1);
        assert!(a != b && a != c && a != d && b != c);
    }

    #[test]
    fn empirical_variance_matches_dt() {
        let dt = 1.0 / 64.0;
        let path = NoisePath::generate(NoiseKey::new(42, 0, 0), 20_000, 1, dt);
        let n = path.steps() as f64;
        let xs: Vec<f64> = (0..path.steps()).map(|i| path.increments(i)[0]).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var / dt - 1.0).abs() < 0.05, "var/dt = {}", var / dt);
        assert!(mean.abs() < 4.0 * (dt / n).sqrt());
    }

    #[test]
    fn coarsen_preserves_endpoint() {
        let path = NoisePath::generate(NoiseKey::new(5, 0, 9), 64, 2, 1.0 / 64.0);
        let coarse = path.coarsen(4);
        assert_eq!(coarse.steps(), 16);
        for k in 0..2 {
            let fine_end = *path.brownian(k).last().unwrap();
            let coarse_end = *coarse.brownian(k).last().unwrap();
            assert!((fine_end - coarse_end).abs() < 1e-12);
        }
    }
}
