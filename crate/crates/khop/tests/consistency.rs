//! Engine vs simulator consistency on configurations spanning the hop
//! count and the intensity scale: sample mean and variance must sit
//! within four standard errors of the exact values.

use khop::exactpoly::{parse_rational, Rational};
use khop::hopcumulants::CumulantEngine;
use khop::simulator::{run_simulation, Intensities, SimConfig};
use num_traits::ToPrimitive;

fn check(k: u32, lambda: &str, tau: &str, seed: u64) {
    let lambda = parse_rational(lambda).unwrap();
    let tau = parse_rational(tau).unwrap();
    let r = Rational::from_integer(1.into());
    let t = Rational::from_integer(k.into()) - &tau;
    let cfg = SimConfig {
        k,
        r,
        t,
        intensities: Intensities::Equal(lambda.clone()),
        n_samples: 50_000,
        seed,
        threads: None,
    };
    let stats = run_simulation(&cfg).unwrap();
    let n = stats.n() as f64;

    let ce = CumulantEngine::new(k.max(2), 2);
    let mean = ce.cumulant_at_equal(k, 1, &lambda, &tau).unwrap().to_f64().unwrap();
    let var = ce.cumulant_at_equal(k, 2, &lambda, &tau).unwrap().to_f64().unwrap();

    let got_mean = stats.mean();
    let se_mean = (stats.variance() / n).sqrt();
    assert!(
        (got_mean - mean).abs() < 4.0 * se_mean,
        "k={k}: mean {got_mean} vs exact {mean} (se {se_mean})"
    );

    let m2 = stats.central_moment_exact(2).unwrap().to_f64().unwrap();
    let m4 = stats.central_moment_exact(4).unwrap().to_f64().unwrap();
    let se_var = ((m4 - m2 * m2) / n).sqrt();
    let got_var = stats.variance();
    assert!(
        (got_var - var).abs() < 4.0 * se_var,
        "k={k}: variance {got_var} vs exact {var} (se {se_var})"
    );
}

#[test]
fn three_hops_unit_intensity() {
    check(3, "1", "1", 101);
}

#[test]
fn four_hops_unit_intensity() {
    check(4, "1", "1", 102);
}

#[test]
fn three_hops_dense_short_lens() {
    check(3, "10", "0.5", 103);
}
