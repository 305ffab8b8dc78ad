//! Streaming count statistics with exact integer accumulators.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactpoly::Rational;
use crate::{Error, Result};

/// Raw power sums of the observed counts up to order six, kept as exact
/// integers, plus the counts themselves in deterministic arrival order.
/// Central moments and cumulant estimates derive from the sums exactly
/// and are only converted to floats at the edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleStats {
    n: u64,
    power_sums: [u128; 6],
    counts: Vec<u64>,
}

impl SampleStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, count: u64) {
        self.n += 1;
        let c = count as u128;
        let mut p = 1u128;
        for s in self.power_sums.iter_mut() {
            p = p.checked_mul(c).expect("count power overflows u128");
            *s = s.checked_add(p).expect("power sum overflows u128");
        }
        self.counts.push(count);
    }

    /// Merge `other` after `self`; used by the batch reducer, in batch
    /// index order.
    pub fn merge(&mut self, other: &SampleStats) {
        self.n += other.n;
        for (a, b) in self.power_sums.iter_mut().zip(&other.power_sums) {
            *a = a.checked_add(*b).expect("power sum overflows u128");
        }
        self.counts.extend_from_slice(&other.counts);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Counts in arrival order (batch by batch).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sorted_counts(&self) -> Vec<u64> {
        let mut v = self.counts.clone();
        v.sort_unstable();
        v
    }

    /// Raw power sum `sum count^j`, `1 <= j <= 6`.
    pub fn power_sum(&self, j: usize) -> u128 {
        self.power_sums[j - 1]
    }

    pub fn mean_exact(&self) -> Result<Rational> {
        if self.n == 0 {
            return Err(Error::EmptySample);
        }
        Ok(Rational::new(
            BigInt::from(self.power_sums[0]),
            BigInt::from(self.n),
        ))
    }

    /// Central moment `m_j = (1/n) sum (x - mean)^j`, exact.
    pub fn central_moment_exact(&self, j: u32) -> Result<Rational> {
        if self.n == 0 {
            return Err(Error::EmptySample);
        }
        assert!(
            (1..=6).contains(&j),
            "central moments tracked up to order 6"
        );
        let n = Rational::from_integer(BigInt::from(self.n));
        let mean = self.mean_exact()?;
        let mut total = Rational::zero();
        for t in 0..=j {
            // binomial expansion against the raw sums; S_0 = n
            let s_t = if t == 0 {
                n.clone()
            } else {
                Rational::from_integer(BigInt::from(self.power_sums[t as usize - 1]))
            };
            let mut term = Rational::from_integer(binomial(BigInt::from(j), BigInt::from(t)));
            term *= s_t;
            let mut neg_mean_pow = Rational::one();
            for _ in 0..(j - t) {
                neg_mean_pow *= -mean.clone();
            }
            total += term * neg_mean_pow;
        }
        Ok(total / n)
    }

    /// Unbiased variance estimate (second k-statistic).
    pub fn variance_exact(&self) -> Result<Rational> {
        if self.n < 2 {
            return Err(Error::EmptySample);
        }
        let n = Rational::from_integer(BigInt::from(self.n));
        let m2 = self.central_moment_exact(2)?;
        Ok(m2 * &n / (n.clone() - Rational::one()))
    }

    /// Third k-statistic `n^2 m3 / ((n-1)(n-2))`, the unbiased estimate
    /// of the third cumulant.
    pub fn k3_exact(&self) -> Result<Rational> {
        if self.n < 3 {
            return Err(Error::EmptySample);
        }
        let n = Rational::from_integer(BigInt::from(self.n));
        let m3 = self.central_moment_exact(3)?;
        let one = Rational::one();
        Ok(m3 * &n * &n / ((n.clone() - &one) * (n - Rational::from_integer(2.into()))))
    }

    /// Fourth k-statistic, the unbiased estimate of the fourth cumulant:
    /// `n^2 [(n+1) m4 - 3 (n-1) m2^2] / ((n-1)(n-2)(n-3))`.
    pub fn k4_exact(&self) -> Result<Rational> {
        if self.n < 4 {
            return Err(Error::EmptySample);
        }
        let n = Rational::from_integer(BigInt::from(self.n));
        let one = Rational::one();
        let m2 = self.central_moment_exact(2)?;
        let m4 = self.central_moment_exact(4)?;
        let num = ((n.clone() + &one) * m4
            - Rational::from_integer(3.into()) * (n.clone() - &one) * (&m2 * &m2))
            * &n
            * &n;
        let den = (n.clone() - &one)
            * (n.clone() - Rational::from_integer(2.into()))
            * (n - Rational::from_integer(3.into()));
        Ok(num / den)
    }

    pub fn mean(&self) -> f64 {
        self.mean_exact()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN)
    }

    pub fn variance(&self) -> f64 {
        self.variance_exact()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN)
    }

    pub fn k3(&self) -> f64 {
        self.k3_exact()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN)
    }

    pub fn k4(&self) -> f64 {
        self.k4_exact()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN)
    }

    pub fn skewness(&self) -> f64 {
        let v = self.variance();
        self.k3() / (v * v.sqrt())
    }

    pub fn ex_kurtosis(&self) -> f64 {
        let v = self.variance();
        self.k4() / (v * v)
    }

    /// Consistency between the derived central moments and the raw
    /// sums; cheap invariant used by tests and the check suites.
    pub fn is_consistent(&self) -> bool {
        if self.n == 0 {
            return self.counts.is_empty() && self.power_sums.iter().all(|&s| s == 0);
        }
        if self.counts.len() as u64 != self.n {
            return false;
        }
        let m2 = match self.central_moment_exact(2) {
            Ok(v) => v,
            Err(_) => return false,
        };
        !m2.is_negative()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_hand_checked_sample() {
        let mut s = SampleStats::new();
        for c in [0u64, 1, 2, 3] {
            s.push(c);
        }
        assert_eq!(s.n(), 4);
        assert_eq!(s.mean_exact().unwrap(), q(3, 2));
        // m2 = (9/4 + 1/4 + 1/4 + 9/4)/4 = 5/4
        assert_eq!(s.central_moment_exact(2).unwrap(), q(5, 4));
        assert_eq!(s.variance_exact().unwrap(), q(5, 3));
        // symmetric sample: m3 = 0
        assert_eq!(s.central_moment_exact(3).unwrap(), q(0, 1));
        assert_eq!(s.k3_exact().unwrap(), q(0, 1));
        assert!(s.is_consistent());
    }

    #[test]
    fn merge_in_batches_is_push_order() {
        let mut whole = SampleStats::new();
        for c in [5u64, 1, 4, 1, 5, 9, 2, 6] {
            whole.push(c);
        }
        let mut a = SampleStats::new();
        let mut b = SampleStats::new();
        for c in [5u64, 1, 4, 1] {
            a.push(c);
        }
        for c in [5u64, 9, 2, 6] {
            b.push(c);
        }
        let mut merged = SampleStats::new();
        merged.merge(&a);
        merged.merge(&b);
        assert_eq!(merged, whole);
    }

    #[test]
    fn empty_stats() {
        let s = SampleStats::new();
        assert_eq!(s.n(), 0);
        assert!(s.mean_exact().is_err());
        assert!(s.is_consistent());
    }

    #[test]
    fn k_statistics_of_known_sample() {
        // counts 0..=5 once each: mean 5/2, m2 = 35/12
        let mut s = SampleStats::new();
        for c in 0..=5u64 {
            s.push(c);
        }
        assert_eq!(s.central_moment_exact(2).unwrap(), q(35, 12));
        assert_eq!(s.variance_exact().unwrap(), q(7, 2));
        assert_eq!(s.central_moment_exact(3).unwrap(), q(0, 1));
    }
}
