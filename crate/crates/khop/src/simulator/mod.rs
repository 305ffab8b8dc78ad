//! Sampling the Poisson unit-disk model and counting k-hops.
//!
//! A k-hop from 0 to `t = kr - tau` with one vertex per cell confines
//! every vertex to a lens of width `tau`, so the Monte Carlo loop
//! samples the lens restriction of the process directly: per lens a
//! Poisson count and uniform offsets. Points outside the lenses never
//! join nor block a path in this regime, so the count distribution is
//! unchanged while the cost drops from `O(lambda k r)` to
//! `O(lambda k tau)` per sample. [`sample_points`] still materializes
//! whole cells for the predicate-level tests.
//!
//! Reproducibility: samples are partitioned into fixed-size batches and
//! batch `b` consumes the named stream `stream(seed, b)`; batch results
//! merge in index order, so the statistics are bit-identical for a
//! fixed `(seed, n_samples)` whatever the thread count. The parallel
//! path needs the `parallel` feature; without it everything runs on the
//! calling thread.

mod count;
mod rng;
mod stats;

pub use count::{
    count_decreasing_chains, count_khops_bruteforce, count_khops_lens, BRUTE_FORCE_MAX_POINTS,
};
pub use rng::{mix, next_f64, sample_poisson, stream};
pub use stats::SampleStats;

use num_traits::{Signed, ToPrimitive};
use rand_core::RngCore;

use crate::exactpoly::{parse_rational, Rational};
use crate::{Error, Result};

/// Samples per seeded batch; part of the determinism contract.
pub const BATCH_SIZE: u64 = 1024;

/// Per-cell intensities: one shared value or one value per cell
/// `1..k-1` (the final cell hosts no path vertex and is not sampled).
#[derive(Clone, Debug)]
pub enum Intensities {
    Equal(Rational),
    PerCell(Vec<Rational>),
}

impl Intensities {
    pub fn vector(&self, k: u32) -> Result<Vec<Rational>> {
        let cells = (k - 1) as usize;
        match self {
            Intensities::Equal(l) => Ok(vec![l.clone(); cells]),
            Intensities::PerCell(v) if v.len() == cells => Ok(v.clone()),
            Intensities::PerCell(v) => Err(Error::InvalidConfig(format!(
                "expected {cells} per-cell intensities for k = {k}, got {}",
                v.len()
            ))),
        }
    }
}

/// Simulation request. Offsets and intensities stay exact; floats are
/// derived only where sampling needs them.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub k: u32,
    pub r: Rational,
    pub t: Rational,
    pub intensities: Intensities,
    pub n_samples: u64,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl SimConfig {
    /// `tau = k r - t`, the common lens width.
    pub fn tau(&self) -> Rational {
        Rational::from_integer(self.k.into()) * &self.r - &self.t
    }

    /// Lens-regime validation: `t` in `[(k-1) r, k r)`, positive radius
    /// and intensities.
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig("k must be at least 2".into()));
        }
        if !self.r.is_positive() {
            return Err(Error::InvalidConfig("r must be positive".into()));
        }
        let tau = self.tau();
        if !tau.is_positive() || tau > self.r {
            return Err(Error::InvalidConfig(format!(
                "t must lie in [(k-1) r, k r); got t = {}, r = {}, k = {}",
                self.t, self.r, self.k
            )));
        }
        for l in self.intensities.vector(self.k)? {
            if !l.is_positive() {
                return Err(Error::InvalidConfig("intensities must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Result<Vec<Rational>> {
        self.intensities.vector(self.k)
    }

    fn lens_means(&self) -> Result<Vec<f64>> {
        let tau = self.tau().to_f64().ok_or(Error::ZeroVariance)?;
        Ok(self
            .lambdas()?
            .iter()
            .map(|l| l.to_f64().unwrap_or(0.0) * tau)
            .collect())
    }
}

/// Convenience constructor from decimal strings (exact parses).
pub fn config_from_decimals(
    k: u32,
    r: &str,
    t: &str,
    lambda: &str,
    n_samples: u64,
    seed: u64,
) -> Result<SimConfig> {
    Ok(SimConfig {
        k,
        r: parse_rational(r)?,
        t: parse_rational(t)?,
        intensities: Intensities::Equal(parse_rational(lambda)?),
        n_samples,
        seed,
        threads: None,
    })
}

/// One draw of the model: per-cell sorted positions for cells
/// `1..k-1` (positions in `((l-1) r, l r)`).
#[derive(Clone, Debug)]
pub struct GraphSample {
    pub cells: Vec<Vec<f64>>,
}

impl GraphSample {
    pub fn total_points(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

/// Sample whole cells: per cell `l` a Poisson(lambda_l r) count and
/// uniform positions, sorted. Deterministic given the generator state;
/// cells draw in order, count first, then positions.
pub fn sample_points(config: &SimConfig, rng: &mut impl RngCore) -> Result<GraphSample> {
    config.validate()?;
    let r = config.r.to_f64().unwrap();
    let lambdas = config.lambdas()?;
    let mut cells = Vec::with_capacity(lambdas.len());
    for (l, lambda) in lambdas.iter().enumerate() {
        let mean = lambda.to_f64().unwrap_or(0.0) * r;
        let count = sample_poisson(rng, mean) as usize;
        let left = l as f64 * r;
        let mut positions: Vec<f64> = (0..count).map(|_| left + next_f64(rng) * r).collect();
        positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cells.push(positions);
    }
    Ok(GraphSample { cells })
}

fn run_batch(lens_means: &[f64], tau: f64, seed: u64, batch_index: u64, len: u64) -> SampleStats {
    let mut rng = stream(seed, batch_index);
    let mut stats = SampleStats::new();
    let mut lenses: Vec<Vec<f64>> = vec![Vec::new(); lens_means.len()];
    for _ in 0..len {
        for (j, &mean) in lens_means.iter().enumerate() {
            let count = sample_poisson(&mut rng, mean) as usize;
            let ys = &mut lenses[j];
            ys.clear();
            ys.extend((0..count).map(|_| next_f64(&mut rng) * tau));
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        stats.push(count_decreasing_chains(&lenses));
    }
    stats
}

fn batch_lengths(n_samples: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut remaining = n_samples;
    let mut index = 0;
    while remaining > 0 {
        let len = remaining.min(BATCH_SIZE);
        out.push((index, len));
        remaining -= len;
        index += 1;
    }
    out
}

/// Run the Monte Carlo loop on the calling thread.
pub fn run_simulation_sequential(config: &SimConfig) -> Result<SampleStats> {
    config.validate()?;
    let tau = config.tau().to_f64().unwrap();
    let lens_means = config.lens_means()?;
    let mut total = SampleStats::new();
    for (index, len) in batch_lengths(config.n_samples) {
        let batch = run_batch(&lens_means, tau, config.seed, index, len);
        total.merge(&batch);
    }
    Ok(total)
}

/// Run the Monte Carlo loop, in parallel over sample batches when the
/// `parallel` feature is enabled and `threads != Some(1)`. Results are
/// bit-identical to the sequential path.
pub fn run_simulation(config: &SimConfig) -> Result<SampleStats> {
    #[cfg(feature = "parallel")]
    {
        if config.threads != Some(1) {
            return run_simulation_parallel(config);
        }
    }
    run_simulation_sequential(config)
}

#[cfg(feature = "parallel")]
fn run_simulation_parallel(config: &SimConfig) -> Result<SampleStats> {
    use rayon::prelude::*;
    config.validate()?;
    let tau = config.tau().to_f64().unwrap();
    let lens_means = config.lens_means()?;
    let seed = config.seed;
    let work = batch_lengths(config.n_samples);
    let run = || -> Vec<SampleStats> {
        work.par_iter()
            .map(|&(index, len)| run_batch(&lens_means, tau, seed, index, len))
            .collect()
    };
    let batches = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut total = SampleStats::new();
    for batch in &batches {
        total.merge(batch);
    }
    Ok(total)
}

/// Raw-sample dump header followed by one count per line.
pub fn dump_samples(
    config: &SimConfig,
    stats: &SampleStats,
    out: &mut impl std::io::Write,
) -> Result<()> {
    let lambda_desc = match &config.intensities {
        Intensities::Equal(l) => l.to_string(),
        Intensities::PerCell(v) => v
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    };
    writeln!(
        out,
        "# khop k={} r={} t={} lambda={} seed={} n={}",
        config.k,
        config.r,
        config.t,
        lambda_desc,
        config.seed,
        stats.n()
    )?;
    for c in stats.counts() {
        writeln!(out, "{c}")?;
    }
    Ok(())
}
