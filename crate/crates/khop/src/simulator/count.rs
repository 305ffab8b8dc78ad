//! Two independent k-hop counters: the exact tuple predicate and the
//! lens-chain dynamic program.

use super::GraphSample;
use crate::{Error, Result};

/// Enumeration guard for the brute-force counter.
pub const BRUTE_FORCE_MAX_POINTS: usize = 1_000;

/// Count ordered tuples of distinct points `(s_1, ..., s_{k-1})` with
/// `t - r < s_{k-1} < (k-1) r` and `s_{j+1} - r < s_j < j r` for
/// `j = k-2, ..., 1`. Exact for any `t` in `[0, kr]`; exponential in the
/// worst case, so the total point count is guarded.
pub fn count_khops_bruteforce(sample: &GraphSample, k: u32, r: f64, t: f64) -> Result<u64> {
    let mut points: Vec<f64> = sample.cells.iter().flatten().copied().collect();
    if points.len() > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::GuardExceeded {
            n: points.len(),
            max: BRUTE_FORCE_MAX_POINTS,
        });
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if k < 2 {
        // a 1-hop needs no intermediate vertex; it exists iff t <= r
        return Ok(u64::from(t <= r));
    }
    let mut used = vec![false; points.len()];
    Ok(count_rec(&points, &mut used, (k - 1) as usize, t - r, r))
}

fn count_rec(points: &[f64], used: &mut [bool], j: usize, lower: f64, r: f64) -> u64 {
    let upper = j as f64 * r;
    let mut total = 0;
    for (i, &s) in points.iter().enumerate() {
        if s >= upper {
            break;
        }
        if s <= lower || used[i] {
            continue;
        }
        if j == 1 {
            total += 1;
        } else {
            used[i] = true;
            total += count_rec(points, used, j - 1, s - r, r);
            used[i] = false;
        }
    }
    total
}

/// Lens-chain count: map the points of lens `j = 1..k-1` (the interval
/// `(jr - tau, jr)`) to offsets `y = x - (jr - tau)` and count strictly
/// decreasing chains `y_1 > y_2 > ... > y_{k-1}` across the lenses.
/// Agrees with the tuple predicate whenever `t = kr - tau` lies in the
/// single-node-per-cell regime.
pub fn count_khops_lens(sample: &GraphSample, k: u32, r: f64, tau: f64) -> u64 {
    if k < 2 {
        return 1;
    }
    let mut lenses: Vec<Vec<f64>> = Vec::with_capacity((k - 1) as usize);
    for j in 1..k as usize {
        let right = j as f64 * r;
        let left = right - tau;
        let mut ys: Vec<f64> = sample
            .cells
            .get(j - 1)
            .map(|cell| {
                cell.iter()
                    .filter(|&&x| x > left && x < right)
                    .map(|&x| x - left)
                    .collect()
            })
            .unwrap_or_default();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lenses.push(ys);
    }
    count_decreasing_chains(&lenses)
}

/// Number of strictly decreasing chains picking one value per list, in
/// list order. Lists must be sorted ascending. Sorted dynamic program
/// with suffix sums and binary search, O(m log m) in the total number
/// of values.
pub fn count_decreasing_chains(lenses: &[Vec<f64>]) -> u64 {
    if lenses.is_empty() {
        return 0;
    }
    let mut prev_vals: &[f64] = &lenses[0];
    // counts[i] = number of chains ending at prev_vals[i]
    let mut counts: Vec<u64> = vec![1; prev_vals.len()];
    for next in &lenses[1..] {
        if counts.is_empty() {
            return 0;
        }
        // suffix[i] = counts[i] + counts[i+1] + ...
        let mut suffix = counts.clone();
        suffix.push(0);
        for i in (0..suffix.len() - 1).rev() {
            suffix[i] += suffix[i + 1];
        }
        counts = next
            .iter()
            .map(|&y| suffix[prev_vals.partition_point(|&p| p <= y)])
            .collect();
        prev_vals = next;
    }
    counts.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(cells: Vec<Vec<f64>>) -> GraphSample {
        GraphSample { cells }
    }

    #[test]
    fn empty_sample_counts_zero() {
        let s = sample(vec![vec![], vec![]]);
        assert_eq!(count_khops_bruteforce(&s, 3, 1.0, 2.5).unwrap(), 0);
        assert_eq!(count_khops_lens(&s, 3, 1.0, 0.5), 0);
    }

    #[test]
    fn two_hop_window() {
        // k=2, r=1, t=3/2: only points in (1/2, 1) count.
        let s = sample(vec![vec![0.3, 0.6], vec![1.4]]);
        // 1.4 sits in cell 2 but k=2 has one lens; keep it in cell 1's
        // sample shape: cells beyond k-1 are ignored by both counters.
        let s2 = sample(vec![vec![0.3, 0.6]]);
        assert_eq!(count_khops_bruteforce(&s2, 2, 1.0, 1.5).unwrap(), 1);
        assert_eq!(count_khops_lens(&s2, 2, 1.0, 0.5), 1);
        let _ = s;
    }

    #[test]
    fn three_hop_hand_example() {
        // k=3, r=1, t=5/2; points 0.8 | 1.6, 1.9: the only 3-hop goes
        // through 0.8 and 1.6 (1.9 leaves no room behind it).
        let s = sample(vec![vec![0.8], vec![1.6, 1.9]]);
        assert_eq!(count_khops_bruteforce(&s, 3, 1.0, 2.5).unwrap(), 1);
        assert_eq!(count_khops_lens(&s, 3, 1.0, 0.5), 1);
    }

    #[test]
    fn decreasing_chain_corner_cases() {
        // one point per lens, already decreasing
        assert_eq!(
            count_decreasing_chains(&[vec![0.9], vec![0.5], vec![0.1]]),
            1
        );
        // increasing: no chain
        assert_eq!(count_decreasing_chains(&[vec![0.1], vec![0.5]]), 0);
        // empty middle lens kills everything
        assert_eq!(count_decreasing_chains(&[vec![0.5], vec![], vec![0.1]]), 0);
        // all cross-lens pairs decreasing: full product
        let lens1 = vec![0.7, 0.8, 0.9];
        let lens2 = vec![0.4, 0.5, 0.6];
        let lens3 = vec![0.1, 0.2];
        assert_eq!(count_decreasing_chains(&[lens1, lens2, lens3]), 18);
        // ties never chain (strict decrease)
        assert_eq!(count_decreasing_chains(&[vec![0.5], vec![0.5]]), 0);
    }

    #[test]
    fn brute_force_guard() {
        let s = sample(vec![vec![0.5; 1_001]]);
        assert!(count_khops_bruteforce(&s, 2, 1.0, 1.5).is_err());
    }
}
