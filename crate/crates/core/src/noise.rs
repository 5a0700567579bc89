//! Reproducible Gaussian increments and the Ornstein–Uhlenbeck driver.
//!
//! Every random number is a pure function of `(master seed, stream, counter,
//! lane)`: the stream key is derived by hashing the master seed with a domain
//! tag and an index, and each draw hashes the key with its counter. No
//! generator state is shared between particles, so results do not depend on
//! how particles are scheduled across threads, and two schemes fed the same
//! stream see the same Brownian increments.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Domain tags separating the keyed substreams.
const TAG_PARTICLE: u64 = 0x7061_7274_6963_6c65;
const TAG_OU: u64 = 0x6f75_2d64_7269_7665;
const TAG_DERIVED: u64 = 0x6465_7269_7665_6473;

/// Lanes within one counter slot.
const LANE_INCREMENT: u64 = 0;
const LANE_MIDPOINT: u64 = 2;
const LANES: u64 = 4;

/// Murmur3 64-bit finaliser. A bijection with full avalanche.
#[inline]
fn fmix64(mut z: u64) -> u64 {
    z ^= z >> 33;
    z = z.wrapping_mul(0xff51_afd7_ed55_8ccd);
    z ^= z >> 33;
    z = z.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z ^ (z >> 33)
}

/// Key for substream `index` within domain `tag`.
pub fn stream_key(master_seed: u64, tag: u64, index: u64) -> u64 {
    let base = fmix64(master_seed ^ fmix64(tag));
    fmix64(base.wrapping_add(fmix64(index.wrapping_mul(GOLDEN).wrapping_add(tag))))
}

/// Independent child seed number `index` of `master_seed`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    stream_key(master_seed, TAG_DERIVED, index)
}

/// Tiny SplitMix-style generator positioned at one `(key, slot)` pair.
///
/// The ziggurat sampler usually needs a single word; rare rejections read
/// further words from the same slot, so the output still depends only on
/// the slot.
struct SlotRng {
    state: u64,
}

impl SlotRng {
    #[inline]
    fn new(key: u64, slot: u64) -> Self {
        Self {
            state: key ^ fmix64(slot.wrapping_add(GOLDEN)),
        }
    }
}

impl RngCore for SlotRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        fmix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }
}

/// Standard normal draw at `(key, counter, lane)`.
#[inline]
pub fn keyed_normal(key: u64, counter: u64, lane: u64) -> f64 {
    let mut rng = SlotRng::new(key, counter.wrapping_mul(LANES).wrapping_add(lane));
    StandardNormal.sample(&mut rng)
}

/// Per-particle source of Brownian increments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseStream {
    master_seed: u64,
    particle_index: u64,
    key: u64,
    counter: u64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, particle_index: u64) -> Self {
        Self::at(master_seed, particle_index, 0)
    }

    /// A stream positioned at an arbitrary step counter.
    pub fn at(master_seed: u64, particle_index: u64, counter: u64) -> Self {
        Self {
            master_seed,
            particle_index,
            key: stream_key(master_seed, TAG_PARTICLE, particle_index),
            counter,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn particle_index(&self) -> u64 {
        self.particle_index
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Two independent standard normals for the current counter, without
    /// advancing.
    #[inline]
    pub fn peek_standard(&self) -> [f64; 2] {
        [
            keyed_normal(self.key, self.counter, LANE_INCREMENT),
            keyed_normal(self.key, self.counter, LANE_INCREMENT + 1),
        ]
    }

    /// Brownian increment `ΔW ~ N(0, τ I)` over one step; advances the counter.
    #[inline]
    pub fn gaussian_increment(&mut self, tau: f64) -> [f64; 2] {
        let z = self.peek_standard();
        self.counter += 1;
        let s = tau.sqrt();
        [s * z[0], s * z[1]]
    }

    /// The full-step increment `ΔW` together with the Brownian value at the
    /// half step, `W(τ/2)`, sampled from the bridge. `ΔW` is identical to
    /// what [`NoiseStream::gaussian_increment`] returns for the same counter,
    /// and `W(τ/2)` and `ΔW - W(τ/2)` are independent `N(0, τ/2)`.
    #[inline]
    pub fn increment_with_midpoint(&mut self, tau: f64) -> ([f64; 2], [f64; 2]) {
        let bridge = [
            keyed_normal(self.key, self.counter, LANE_MIDPOINT),
            keyed_normal(self.key, self.counter, LANE_MIDPOINT + 1),
        ];
        let dw = self.gaussian_increment(tau);
        let half = 0.5 * tau.sqrt();
        (dw, [0.5 * dw[0] + half * bridge[0], 0.5 * dw[1] + half * bridge[1]])
    }
}

/// Parameters of `dη = θ(μ - η) dt + σ dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    /// Reversion rate θ > 0.
    pub theta: f64,
    /// Long-run mean μ.
    pub mu: f64,
    /// Volatility σ ≥ 0.
    pub sigma: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        Self {
            theta: 1.0,
            mu: 0.0,
            sigma: 1.0,
        }
    }
}

impl OuParams {
    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.theta)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(format!("theta_ou must be positive, got {}", self.theta));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(format!("sigma_ou must be non-negative, got {}", self.sigma));
        }
        if !self.mu.is_finite() {
            return Err(format!("mu_ou must be finite, got {}", self.mu));
        }
        Ok(())
    }

    /// `(e^{-θτ}, σ √((1 - e^{-2θτ}) / 2θ))`.
    fn transition(&self, tau: f64) -> (f64, f64) {
        let decay = (-self.theta * tau).exp();
        let spread = self.sigma * (-(-2.0 * self.theta * tau).exp_m1() / (2.0 * self.theta)).sqrt();
        (decay, spread)
    }
}

/// Exact-in-distribution OU transition over `tau` with standard normal `xi`.
pub fn ou_step(params: &OuParams, eta: f64, tau: f64, xi: f64) -> f64 {
    let (decay, spread) = params.transition(tau);
    params.mu + (eta - params.mu) * decay + spread * xi
}

/// Generates one OU realisation on a uniform step grid, one value at a time.
///
/// The value at step `k` depends only on `(seed, path index, k)`, so every
/// particle that shares a path regenerates identical driver values.
#[derive(Debug, Clone)]
pub struct OuDriver {
    params: OuParams,
    key: u64,
    decay: f64,
    spread: f64,
    step: u64,
    value: f64,
}

impl OuDriver {
    /// Starts path `path_index` from a draw of the stationary law
    /// `N(μ, σ²/2θ)`.
    pub fn new(params: OuParams, master_seed: u64, path_index: u64, tau: f64) -> Self {
        let key = stream_key(master_seed, TAG_OU, path_index);
        let (decay, spread) = params.transition(tau);
        let value = params.mu + params.stationary_variance().sqrt() * keyed_normal(key, 0, 0);
        Self {
            params,
            key,
            decay,
            spread,
            step: 0,
            value,
        }
    }

    pub fn params(&self) -> &OuParams {
        &self.params
    }

    /// `η` at the current grid point.
    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Moves to the next grid point and returns the new value.
    #[inline]
    pub fn advance(&mut self) -> f64 {
        self.step += 1;
        let xi = keyed_normal(self.key, self.step, 0);
        self.value = self.params.mu + (self.value - self.params.mu) * self.decay + self.spread * xi;
        self.value
    }
}

/// One sampled OU realisation on the step grid, `values[k] = η(k τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuPath {
    pub tau: f64,
    pub values: Vec<f64>,
}

/// Materialises path `path_index` for `n_steps` steps (`n_steps + 1` values).
pub fn ou_path(params: &OuParams, tau: f64, n_steps: usize, master_seed: u64, path_index: u64) -> OuPath {
    let mut driver = OuDriver::new(*params, master_seed, path_index, tau);
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(driver.value());
    for _ in 0..n_steps {
        values.push(driver.advance());
    }
    OuPath { tau, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_are_pure_in_seed_index_counter() {
        let mut a = NoiseStream::new(42, 7);
        let first = a.gaussian_increment(0.1);
        let second = a.gaussian_increment(0.1);
        assert_eq!(NoiseStream::at(42, 7, 1).gaussian_increment(0.1), second);
        assert_eq!(NoiseStream::new(42, 7).gaussian_increment(0.1), first);
        assert_ne!(NoiseStream::new(42, 8).gaussian_increment(0.1), first);
        assert_ne!(NoiseStream::new(43, 7).gaussian_increment(0.1), first);
        assert_eq!(a.counter(), 2);
    }

    #[test]
    fn midpoint_shares_the_full_increment() {
        let mut a = NoiseStream::new(3, 11);
        let mut b = a.clone();
        let dw = a.gaussian_increment(0.05);
        let (dw2, _) = b.increment_with_midpoint(0.05);
        assert_eq!(dw, dw2);
        assert_eq!(a.counter(), b.counter());
    }

    #[test]
    fn deterministic_ou_decay() {
        let params = OuParams {
            theta: 1.0,
            mu: 0.0,
            sigma: 0.0,
        };
        let next = ou_step(&params, 1.0, 2f64.ln(), 0.7);
        assert!((next - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_volatility_path_from_zero_stays_zero() {
        let params = OuParams {
            theta: 1.0,
            mu: 0.0,
            sigma: 0.0,
        };
        let path = ou_path(&params, 0.05, 100, 9, 0);
        assert_eq!(path.values.len(), 101);
        assert!(path.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn driver_matches_materialised_path() {
        let params = OuParams::default();
        let path = ou_path(&params, 0.05, 50, 5, 3);
        let mut driver = OuDriver::new(params, 5, 3, 0.05);
        assert_eq!(driver.value(), path.values[0]);
        for &v in &path.values[1..] {
            assert_eq!(driver.advance(), v);
        }
    }

    #[test]
    fn ou_substream_differs_from_particle_substream() {
        let key_p = stream_key(1, TAG_PARTICLE, 0);
        let key_o = stream_key(1, TAG_OU, 0);
        assert_ne!(key_p, key_o);
    }
}
