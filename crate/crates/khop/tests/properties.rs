//! Property tests for the pieces with clean algebraic contracts.

use khop::cltstats::{ks_distance, NormalizedSample, Provenance};
use khop::exactpoly::{format_rational, parse_rational, Rational};
use khop::simulator::{count_decreasing_chains, SampleStats};
use num_bigint::BigInt;
use proptest::prelude::*;

/// Reference chain counter: plain recursion over all picks.
fn count_chains_naive(lenses: &[Vec<f64>]) -> u64 {
    fn rec(lenses: &[Vec<f64>], level: usize, prev: f64) -> u64 {
        if level == lenses.len() {
            return 1;
        }
        lenses[level]
            .iter()
            .filter(|&&y| y < prev)
            .map(|&y| rec(lenses, level + 1, y))
            .sum()
    }
    rec(lenses, 0, f64::INFINITY)
}

proptest! {
    #[test]
    fn rational_text_round_trips(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let x = Rational::new(BigInt::from(n), BigInt::from(d));
        let text = format_rational(&x);
        prop_assert_eq!(parse_rational(&text).unwrap(), x);
    }

    #[test]
    fn decimal_parses_match_fraction_parses(int_part in 0u32..1000, frac in 0u32..1000) {
        let text = format!("{int_part}.{frac:03}");
        let direct = parse_rational(&text).unwrap();
        let fraction = parse_rational(&format!("{}/1000", int_part as u64 * 1000 + frac as u64)).unwrap();
        prop_assert_eq!(direct, fraction);
    }

    #[test]
    fn chain_counter_matches_naive_recursion(
        lenses in prop::collection::vec(
            prop::collection::vec(0.0f64..1.0, 0..7),
            1..4,
        )
    ) {
        let sorted: Vec<Vec<f64>> = lenses
            .iter()
            .map(|l| {
                let mut v = l.clone();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            })
            .collect();
        let fast = count_decreasing_chains(&sorted);
        let naive = count_chains_naive(&sorted);
        prop_assert_eq!(fast, naive);
        // never more than the full product of lens sizes
        let product: u64 = sorted.iter().map(|l| l.len() as u64).product();
        prop_assert!(fast <= product);
    }

    #[test]
    fn stats_merge_equals_single_pass(
        counts in prop::collection::vec(0u64..500, 1..200),
        split in 0usize..200,
    ) {
        let split = split.min(counts.len());
        let mut whole = SampleStats::new();
        for &c in &counts {
            whole.push(c);
        }
        let mut left = SampleStats::new();
        let mut right = SampleStats::new();
        for &c in &counts[..split] {
            left.push(c);
        }
        for &c in &counts[split..] {
            right.push(c);
        }
        left.merge(&right);
        prop_assert_eq!(left, whole);
    }

    #[test]
    fn ks_distance_stays_in_unit_interval(
        values in prop::collection::vec(-50.0f64..50.0, 1..80)
    ) {
        let sample = NormalizedSample::from_values(
            values,
            Provenance {
                k: 2,
                lambda: Rational::from_integer(1.into()),
                t: Rational::from_integer(1.into()),
                seed: 0,
                mean: 0.0,
                sd: 1.0,
            },
        );
        let d = ks_distance(&sample).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
