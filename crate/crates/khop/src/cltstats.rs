//! Distance-to-normal statistics and the convergence-rate experiment.

use num_traits::ToPrimitive;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::exactpoly::Rational;
use crate::variance;
use crate::{Error, Result};

/// Standard normal CDF via the complementary error function; absolute
/// error well below 1e-12 over the whole line.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Provenance of a renormalized sample: where the counts came from and
/// the exact constants used to center and scale them.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub k: u32,
    pub lambda: Rational,
    pub t: Rational,
    pub seed: u64,
    pub mean: f64,
    pub sd: f64,
}

/// Sorted renormalized counts plus provenance.
#[derive(Clone, Debug)]
pub struct NormalizedSample {
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl NormalizedSample {
    /// Sorted values, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn from_values(mut values: Vec<f64>, provenance: Provenance) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        NormalizedSample { values, provenance }
    }
}

/// Center and scale counts by the engine-exact mean
/// `(lambda tau)^{k-1}/(k-1)!` and standard deviation (square root of
/// the exact equal-intensity variance) rather than by sample estimates.
pub fn normalize(
    counts: &[u64],
    k: u32,
    lambda: &Rational,
    r: &Rational,
    t: &Rational,
    seed: u64,
) -> Result<NormalizedSample> {
    let tau = Rational::from_integer(k.into()) * r - t;
    let var = variance::variance_equal_at(k, lambda, &tau)?;
    let var_f = var.to_f64().ok_or(Error::ZeroVariance)?;
    if var_f <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut mean = Rational::from_integer(1.into());
    let lt = lambda * &tau;
    for i in 1..k as i64 {
        mean *= &lt;
        mean /= Rational::from_integer(i.into());
    }
    let mean_f = mean.to_f64().unwrap();
    let sd = var_f.sqrt();
    let values: Vec<f64> = counts.iter().map(|&c| (c as f64 - mean_f) / sd).collect();
    Ok(NormalizedSample::from_values(
        values,
        Provenance {
            k,
            lambda: lambda.clone(),
            t: t.clone(),
            seed,
            mean: mean_f,
            sd,
        },
    ))
}

/// Kolmogorov distance between the empirical CDF and the standard
/// normal: `max_i max(i/n - Phi(x_i), Phi(x_i) - (i-1)/n)`.
pub fn ks_distance(sample: &NormalizedSample) -> Result<f64> {
    let xs = sample.values();
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = xs.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let phi = normal_cdf(x);
        sup = sup.max((i + 1) as f64 / n - phi).max(phi - i as f64 / n);
    }
    Ok(sup)
}

/// First Wasserstein distance to the standard normal, computed as the
/// exact piecewise integral of `|F_n - Phi|` between order statistics
/// using the antiderivative `x Phi(x) + phi(x)`.
pub fn wasserstein1(sample: &NormalizedSample) -> Result<f64> {
    let xs = sample.values();
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = xs.len() as f64;
    // int Phi = x Phi(x) + phi(x); below the smallest order statistic
    // F_n = 0 and the tail integral of Phi converges.
    let anti = |x: f64| x * normal_cdf(x) + normal_pdf(x);
    let first = xs[0];
    let last = xs[xs.len() - 1];
    let mut total = anti(first); // integral of Phi over (-inf, x_1]
                                 // above the largest order statistic: int (1 - Phi) = anti(x) - x
    total += anti(last) - last;
    for (i, w) in xs.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let c = (i + 1) as f64 / n; // F_n on [a, b)
        let phi_a = normal_cdf(a);
        let phi_b = normal_cdf(b);
        if phi_a >= c {
            // Phi above the step everywhere
            total += anti(b) - anti(a) - c * (b - a);
        } else if phi_b <= c {
            total += c * (b - a) - (anti(b) - anti(a));
        } else {
            let x_star = normal_quantile(c).clamp(a, b);
            total += c * (x_star - a) - (anti(x_star) - anti(a));
            total += anti(b) - anti(x_star) - c * (b - x_star);
        }
    }
    Ok(total)
}

/// One lambda point of a rate experiment.
#[derive(Clone, Debug)]
pub struct RatePoint {
    pub lambda: f64,
    pub n_samples: u64,
    pub ks: f64,
    pub w1: f64,
}

/// Distances per lambda, with log-log slope fits.
#[derive(Clone, Debug, Default)]
pub struct RateSeries {
    pub points: Vec<RatePoint>,
}

impl RateSeries {
    pub fn slope_ks(&self) -> Result<f64> {
        rate_fit(self.points.iter().map(|p| (p.lambda, p.ks)))
    }

    pub fn slope_w1(&self) -> Result<f64> {
        rate_fit(self.points.iter().map(|p| (p.lambda, p.w1)))
    }
}

/// Least-squares slope of `log d` against `log lambda`.
pub fn rate_fit(points: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .into_iter()
        .map(|(lambda, d)| {
            if d <= 0.0 || lambda <= 0.0 {
                Err(Error::NonPositiveDistance)
            } else {
                Ok((lambda.ln(), d.ln()))
            }
        })
        .collect::<Result<_>>()?;
    if logs.len() < 3 {
        return Err(Error::TooFewPoints(logs.len()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{next_f64, stream};
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn plain(values: Vec<f64>) -> NormalizedSample {
        NormalizedSample::from_values(
            values,
            Provenance {
                k: 2,
                lambda: q(1, 1),
                t: q(3, 2),
                seed: 0,
                mean: 0.0,
                sd: 1.0,
            },
        )
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert!(normal_cdf(-8.0) < 1e-15);
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-13);
        assert!((normal_cdf(-3.0) - 1.3498980316300946e-3).abs() < 1e-15);
        assert!((normal_cdf(0.5) - 0.6914624612740131).abs() < 1e-13);
    }

    #[test]
    fn ks_hand_values() {
        // single atom at zero
        assert!((ks_distance(&plain(vec![0.0])).unwrap() - 0.5).abs() < 1e-15);
        // two points at -1, 1: 0.5 - Phi(-1)
        let d = ks_distance(&plain(vec![-1.0, 1.0])).unwrap();
        assert!((d - 0.341344746).abs() < 1e-6);
        assert!(ks_distance(&plain(vec![])).is_err());
    }

    #[test]
    fn ks_of_large_normal_sample_is_small() {
        // Box-Muller from the pinned stream; the DKW bound makes
        // values above 2e-3 vanishingly unlikely at n = 1e6.
        let mut rng = stream(2024, 0);
        let n = 1_000_000;
        let mut values = Vec::with_capacity(n);
        while values.len() < n {
            let u1: f64 = next_f64(&mut rng).max(1e-300);
            let u2: f64 = next_f64(&mut rng);
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            values.push(r * c);
            if values.len() < n {
                values.push(r * s);
            }
        }
        let d = ks_distance(&plain(values)).unwrap();
        assert!(d < 2e-3, "ks = {d}");
    }

    #[test]
    fn wasserstein_hand_values() {
        // single atom at zero: E|Z| = sqrt(2/pi)
        let w = wasserstein1(&plain(vec![0.0])).unwrap();
        assert!((w - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // quantile discretization at (i - 1/2)/n is nearly optimal
        let n = 10_000;
        let qs: Vec<f64> = (0..n)
            .map(|i| normal_quantile((i as f64 + 0.5) / n as f64))
            .collect();
        let w = wasserstein1(&plain(qs)).unwrap();
        assert!(w < 1e-3, "w1 = {w}");
        // symmetry under sign flip
        let xs = vec![-1.25, -0.5, 0.75, 2.0];
        let flipped: Vec<f64> = xs.iter().map(|x| -x).collect();
        let a = wasserstein1(&plain(xs)).unwrap();
        let b = wasserstein1(&plain(flipped)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_reweight_through_n() {
        // a repeated order statistic doubles its ECDF step
        let a = ks_distance(&plain(vec![-1.0, -1.0, 1.0])).unwrap();
        let b = ks_distance(&plain(vec![-1.0, 1.0])).unwrap();
        assert!((b - 0.341344746).abs() < 1e-6);
        assert!((a - (2.0 / 3.0 - normal_cdf(-1.0))).abs() < 1e-12);
        let wa = wasserstein1(&plain(vec![-1.0, -1.0, 1.0])).unwrap();
        let wb = wasserstein1(&plain(vec![-1.0, 1.0])).unwrap();
        assert!(wa > wb);
    }

    #[test]
    fn rate_fit_recovers_planted_slopes() {
        let lambdas = [25.0f64, 50.0, 100.0, 200.0, 400.0];
        let exact: Vec<(f64, f64)> = lambdas.iter().map(|&l| (l, 3.0 / l.sqrt())).collect();
        let slope = rate_fit(exact).unwrap();
        assert!((slope + 0.5).abs() < 1e-12, "slope {slope}");
        let flat: Vec<(f64, f64)> = lambdas.iter().map(|&l| (l, 0.25)).collect();
        assert!(rate_fit(flat).unwrap().abs() < 1e-12);
        let powerlaw: Vec<(f64, f64)> = lambdas.iter().map(|&l| (l, 7.0 * l.powf(-1.25))).collect();
        assert!((rate_fit(powerlaw).unwrap() + 1.25).abs() < 1e-12);
        // degenerate inputs
        assert!(rate_fit([(1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
        assert!(rate_fit([(1.0, 1.0), (2.0, 0.5)]).is_err());
    }

    #[test]
    fn normalize_uses_engine_constants() {
        // k = 2: (N - lambda tau)/sqrt(lambda tau)
        let counts = [0u64, 1, 2, 3];
        let s = normalize(&counts, 2, &q(2, 1), &q(1, 1), &q(3, 2), 0).unwrap();
        assert!((s.provenance.mean - 1.0).abs() < 1e-15);
        assert!((s.provenance.sd - 1.0).abs() < 1e-15);
        let vals = s.values();
        assert_eq!(vals.len(), 4);
        assert!((vals[0] + 1.0).abs() < 1e-15);
        // zero variance rejected
        assert!(normalize(&counts, 2, &q(2, 1), &q(1, 1), &q(2, 1), 0).is_err());
    }
}
