//! Data-parallel vs sequential Monte Carlo throughput, and the lens
//! chain counter on its own.
//!
//! Run with `cargo bench -p khop`. Building with
//! `--no-default-features` removes rayon, in which case the "parallel"
//! benchmark measures the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use khop::exactpoly::Rational;
use khop::simulator::{
    count_decreasing_chains, run_simulation, run_simulation_sequential, stream, Intensities,
    SimConfig,
};
use num_bigint::BigInt;
use rand_core::RngCore;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn config(lambda: i64, samples: u64, threads: Option<usize>) -> SimConfig {
    SimConfig {
        k: 3,
        r: Rational::from_integer(1.into()),
        t: q(5, 2),
        intensities: Intensities::Equal(q(lambda, 1)),
        n_samples: samples,
        seed: 0xbe,
        threads,
    }
}

fn bench_simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("three_hop_simulation");
    group.sample_size(10);
    for lambda in [50i64, 200] {
        let samples = 20_000u64;
        group.bench_with_input(
            BenchmarkId::new("sequential", lambda),
            &lambda,
            |b, &lambda| {
                let cfg = config(lambda, samples, Some(1));
                b.iter(|| run_simulation_sequential(black_box(&cfg)).unwrap());
            },
        );
        group.bench_with_input(
            BenchmarkId::new("parallel", lambda),
            &lambda,
            |b, &lambda| {
                let cfg = config(lambda, samples, None);
                b.iter(|| run_simulation(black_box(&cfg)).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_chain_counter(c: &mut Criterion) {
    let mut rng = stream(7, 0);
    let mut lens = |n: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..n)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let lenses: Vec<Vec<f64>> = (0..4).map(|_| lens(400)).collect();
    c.bench_function("decreasing_chains_4x400", |b| {
        b.iter(|| count_decreasing_chains(black_box(&lenses)))
    });
}

criterion_group!(benches, bench_simulation, bench_chain_counter);
criterion_main!(benches);
