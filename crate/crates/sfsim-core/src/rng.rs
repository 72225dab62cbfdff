//! Deterministic, counter-based random streams.
//!
//! Every pulse owns its own ChaCha stream derived from
//! `(master seed, stream salt, pulse index)`, so disjoint pulse ranges can be
//! simulated on any number of workers and still reproduce bit-identical
//! results once merged in pulse order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// splitmix64 finalizer; good avalanche for key derivation.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for one pulse of one logical stream.
///
/// `stream` separates independent uses of the same master seed (scan points,
/// calibration sweeps, ...); `pulse_index` is the pulse counter within the
/// stream.
pub fn pulse_rng(master_seed: u64, stream: u64, pulse_index: u64) -> ChaCha8Rng {
    let mut state = master_seed
        ^ stream.wrapping_mul(0xa076_1d64_78bd_642f)
        ^ pulse_index.wrapping_mul(0xe703_7ed1_a0b4_28db);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Uniform draw in `[0, 1)` with 53-bit resolution.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn bernoulli(rng: &mut impl RngCore, p: f64) -> bool {
    uniform(rng) < p
}

/// Standard-normal draw via Box-Muller.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    // Guard against ln(0).
    let u1 = (uniform(rng)).max(f64::MIN_POSITIVE);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Poisson draw; Knuth's product method, adequate for the small means used
/// here (pairs, noise photons and dark counts per pulse are all ≪ 30).
pub fn poisson(rng: &mut impl RngCore, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let limit = libm::exp(-mean);
    let mut count = 0u64;
    let mut product = uniform(rng);
    while product > limit {
        count += 1;
        product *= uniform(rng);
    }
    count
}

/// Exponential draw with the given rate (events per unit time).
pub fn exponential(rng: &mut impl RngCore, rate: f64) -> f64 {
    -libm::log((uniform(rng)).max(f64::MIN_POSITIVE)) / rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_reproduces_the_stream() {
        let mut a = pulse_rng(42, 7, 1234);
        let mut b = pulse_rng(42, 7, 1234);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn adjacent_pulses_get_distinct_streams() {
        let mut a = pulse_rng(42, 0, 0);
        let mut b = pulse_rng(42, 0, 1);
        let mut c = pulse_rng(42, 1, 0);
        let first: [u64; 3] = [a.next_u64(), b.next_u64(), c.next_u64()];
        assert_ne!(first[0], first[1]);
        assert_ne!(first[0], first[2]);
        assert_ne!(first[1], first[2]);
    }

    #[test]
    fn poisson_mean_matches() {
        let mut rng = pulse_rng(1, 0, 0);
        let mean = 0.09;
        let n = 200_000u64;
        let total: u64 = (0..n).map(|_| poisson(&mut rng, mean)).sum();
        let sample_mean = total as f64 / n as f64;
        // 3σ band for the sample mean of a Poisson(0.09).
        let tol = 3.0 * (mean / n as f64).sqrt();
        assert!((sample_mean - mean).abs() < tol, "{sample_mean} vs {mean}");
    }

    #[test]
    fn poisson_of_zero_mean_is_zero() {
        let mut rng = pulse_rng(1, 0, 1);
        assert!((0..100).all(|_| poisson(&mut rng, 0.0) == 0));
    }

    #[test]
    fn normal_moments_match() {
        let mut rng = pulse_rng(2, 0, 0);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt() * 1.5, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
