//! Set partitions, Stirling/Bell numbers, and the generic transforms
//! between joint moments and joint cumulants.

use crate::exactpoly::MultiPoly;
use crate::{Error, Result};

/// Desk-scale guard for partition enumeration (Bell(8) = 4140).
pub const MAX_PARTITION_N: usize = 8;

/// A partition of `{0..n-1}` into disjoint nonempty blocks, canonical:
/// blocks are sorted by their smallest element and elements inside a
/// block are ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl SetPartition {
    fn from_rgs(rgs: &[usize]) -> Self {
        let nblocks = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        SetPartition {
            blocks,
            block_of: rgs.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Index of the block containing element `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }
}

/// All partitions of an n-element set, generated from restricted growth
/// strings; the count is Bell(n).
pub fn set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    if n == 0 || n > MAX_PARTITION_N {
        return Err(Error::OutOfRange {
            what: "set_partitions",
            detail: format!("n = {n}, supported 1..={MAX_PARTITION_N}"),
        });
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        out.push(SetPartition::from_rgs(&rgs));
        // next restricted growth string
        let mut i = n;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            let cap = 1 + rgs[..i].iter().copied().max().unwrap();
            if rgs[i] < cap {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// Stirling number of the second kind: partitions of n with exactly l
/// blocks.
pub fn stirling2(n: usize, l: usize) -> Result<u128> {
    if n == 0 || l == 0 || l > n || n > MAX_PARTITION_N * 4 {
        return Err(Error::OutOfRange {
            what: "stirling2",
            detail: format!("(n, l) = ({n}, {l})"),
        });
    }
    let mut row = vec![0u128; l + 1];
    row[1] = 1; // S(1, 1)
    for _ in 2..=n {
        for j in (1..=l).rev() {
            row[j] = (j as u128) * row[j] + row[j - 1];
        }
    }
    Ok(row[l])
}

/// Bell number: total number of partitions of an n-element set.
pub fn bell(n: usize) -> Result<u128> {
    let mut total = 0u128;
    for l in 1..=n {
        total += stirling2(n, l)?;
    }
    Ok(total)
}

/// Joint moment from joint cumulants: sum over partitions of the product
/// of block cumulants. `kappa` is called with ascending index subsets of
/// `{0..n-1}`.
pub fn cumulants_to_moments(
    kappa: &mut dyn FnMut(&[usize]) -> MultiPoly,
    n: usize,
) -> Result<MultiPoly> {
    let parts = set_partitions(n)?;
    let mut total: Option<MultiPoly> = None;
    for p in &parts {
        let mut term: Option<MultiPoly> = None;
        for block in p.blocks() {
            let factor = kappa(block);
            term = Some(match term {
                None => factor,
                Some(t) => t.mul(&factor),
            });
        }
        let term = term.unwrap();
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term),
        });
    }
    Ok(total.unwrap())
}

/// Joint cumulant from joint moments:
/// `sum_l (l-1)! (-1)^(l-1) sum_{partitions with l blocks} prod m(block)`,
/// the Moebius-weighted sum on the partition lattice. Note that some
/// texts state the lattice Moebius value with the opposite sign parity;
/// the `(-1)^(l-1)` convention used here is the one that reproduces the
/// Poisson cumulants.
pub fn moments_to_cumulants(
    moment: &mut dyn FnMut(&[usize]) -> MultiPoly,
    n: usize,
) -> Result<MultiPoly> {
    let parts = set_partitions(n)?;
    let mut total: Option<MultiPoly> = None;
    for p in &parts {
        let l = p.num_blocks();
        let mut weight: i64 = 1;
        for i in 1..l as i64 {
            weight *= -i;
        }
        let mut term: Option<MultiPoly> = None;
        for block in p.blocks() {
            let factor = moment(block);
            term = Some(match term {
                None => factor,
                Some(t) => t.mul(&factor),
            });
        }
        let term = term.unwrap();
        let reg = term.registry().clone();
        let term = term.mul(&MultiPoly::from_int(&reg, weight));
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term),
        });
    }
    Ok(total.unwrap())
}
