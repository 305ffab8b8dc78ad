//! Exact moments and cumulants of k-hop path counts in the 1D unit-disk
//! random graph with Poisson vertices, plus a Monte Carlo harness that
//! verifies the closed forms and measures normal-approximation rates.
//!
//! The crate has two halves:
//!
//! * a symbolic half ([`exactpoly`], [`partitions`], [`hopmoments`],
//!   [`hopcumulants`], [`variance`]) that computes joint moments and
//!   cumulants of the k-hop count as exact rational polynomials in the
//!   endpoint offsets and per-cell intensities, and
//! * a numeric half ([`simulator`], [`cltstats`]) that samples the point
//!   process with reproducible seeded streams, counts k-hops two
//!   independent ways, and measures Kolmogorov/Wasserstein distances of
//!   the renormalized count to the standard normal.
//!
//! [`oracles`] holds slower independent computation paths used to
//! cross-check the engines, and [`suites`] bundles the verification
//! suites exposed through `khop check`.

pub mod cli;
pub mod cltstats;
pub mod exactpoly;
pub mod hopcumulants;
pub mod hopmoments;
pub mod oracles;
pub mod partitions;
pub mod simulator;
pub mod suites;
pub mod variance;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomials belong to different variable registries")]
    RegistryMismatch,
    #[error("integration limit contains the integration variable {0}")]
    LimitContainsVariable(String),
    #[error("no value assigned to symbol {0}")]
    MissingSymbol(String),
    #[error("cap {0} is not a totally ordered endpoint symbol")]
    UnorderedCap(String),
    #[error("{what} out of supported range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("engine limit exceeded: {0} (construct the engine with larger maxima to override)")]
    LimitExceeded(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("point budget exceeded: {n} points (brute-force guard is {max})")]
    GuardExceeded { n: usize, max: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("zero variance: normalization undefined")]
    ZeroVariance,
    #[error("distances must be positive for a log-log fit")]
    NonPositiveDistance,
    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("negative argument: {0}")]
    NegativeArgument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
