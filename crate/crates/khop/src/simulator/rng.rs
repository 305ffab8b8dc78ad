//! Seeded random streams and Poisson sampling.
//!
//! Determinism contract: the algorithms below are pinned and never
//! change silently. A stream is a ChaCha12 generator keyed by four
//! SplitMix64 outputs (constants 0x9E3779B97F4A7C15,
//! 0xBF58476D1CE4E5B9, 0x94D049BB133111EB, shifts 30/27/31) from the
//! state `seed XOR splitmix64(index)`. Uniform doubles take the top 53
//! bits of `next_u64`. Poisson sampling uses sequential inversion below
//! mean 30 and the transformed-rejection method with squeeze above,
//! drawing `u` then `v` per attempt.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::function::gamma::ln_gamma;

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Mix a salt into a seed; used to derive independent sub-experiment
/// seeds (one per lambda point of a rate experiment, for instance).
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut s = salt;
    let h = splitmix64(&mut s);
    seed ^ h
}

/// The `index`-th named stream of `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut state = mix(seed, index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Uniform on [0, 1) with 53 random bits.
pub fn next_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Poisson draw with the given mean.
pub fn sample_poisson(rng: &mut impl RngCore, mean: f64) -> u64 {
    assert!(
        mean.is_finite() && mean >= 0.0,
        "poisson mean must be finite and nonnegative"
    );
    if mean == 0.0 {
        0
    } else if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_rejection(rng, mean)
    }
}

fn poisson_inversion(rng: &mut impl RngCore, mean: f64) -> u64 {
    let u = next_f64(rng);
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if k > 2_000 {
            break; // unreachable for mean < 30; guards float stalls
        }
    }
    k
}

/// Hoermann's transformed rejection with squeeze (PTRS), valid for
/// mean >= 10; used from 30 up. One attempt draws `u` then `v`.
fn poisson_rejection(rng: &mut impl RngCore, mean: f64) -> u64 {
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mean = mean.ln();
    loop {
        let u = next_f64(rng) - 0.5;
        let v = next_f64(rng);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= k * ln_mean - mean - ln_factorial(k) {
            return k as u64;
        }
    }
}

fn ln_factorial(k: f64) -> f64 {
    ln_gamma(k + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a = stream(7, 0);
        let mut b = stream(7, 0);
        let mut c = stream(7, 1);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn uniform_is_in_unit_interval() {
        let mut rng = stream(1, 0);
        for _ in 0..10_000 {
            let x = next_f64(&mut rng);
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn poisson_moments_small_mean() {
        // inversion path: mean and variance within 4 standard errors
        let mut rng = stream(42, 0);
        let mean = 2.0;
        let n = 100_000;
        let (mut s1, mut s2) = (0f64, 0f64);
        for _ in 0..n {
            let x = sample_poisson(&mut rng, mean) as f64;
            s1 += x;
            s2 += x * x;
        }
        let m = s1 / n as f64;
        let var = s2 / n as f64 - m * m;
        let se_mean = (mean / n as f64).sqrt();
        assert!((m - mean).abs() < 4.0 * se_mean, "mean {m}");
        // Poisson central fourth moment is 3 lambda^2 + lambda, so
        // Var(sample variance) ~ (mu4 - sigma^4)/n.
        let central4 = 3.0 * mean * mean + mean;
        let se_var = ((central4 - mean * mean) / n as f64).sqrt();
        assert!((var - mean).abs() < 4.0 * se_var, "variance {var}");
    }

    #[test]
    fn poisson_moments_large_mean() {
        // rejection path: mean, variance, and skewness within 4 SE
        let mut rng = stream(43, 0);
        let mean = 64.0;
        let n = 200_000;
        let (mut s1, mut s2, mut s3) = (0f64, 0f64, 0f64);
        for _ in 0..n {
            let x = sample_poisson(&mut rng, mean) as f64;
            s1 += x;
            s2 += x * x;
            s3 += x * x * x;
        }
        let nf = n as f64;
        let m = s1 / nf;
        let var = s2 / nf - m * m;
        let m3 = s3 / nf - 3.0 * m * var - m * m * m;
        assert!((m - mean).abs() < 4.0 * (mean / nf).sqrt(), "mean {m}");
        let central4 = 3.0 * mean * mean + mean;
        let se_var = ((central4 - mean * mean) / nf).sqrt();
        assert!((var - mean).abs() < 4.0 * se_var, "variance {var}");
        // third central moment of Poisson is the mean; its sampling SD
        // is roughly sqrt((mu6-ish) / n) ~ sqrt(15 mean^3 / n)
        let se_m3 = (15.0 * mean.powi(3) / nf).sqrt();
        assert!((m3 - mean).abs() < 4.0 * se_m3, "third central moment {m3}");
    }

    #[test]
    fn poisson_zero_mean() {
        let mut rng = stream(1, 2);
        for _ in 0..100 {
            assert_eq!(sample_poisson(&mut rng, 0.0), 0);
        }
    }
}
