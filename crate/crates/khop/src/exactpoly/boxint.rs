//! Exact integration over boxes with symbolically ordered caps.

use std::collections::HashMap;
use std::sync::Arc;

use super::poly::MultiPoly;
use super::registry::{Symbol, VarRegistry, VarRole};
use crate::{Error, Result};

/// One integration variable of a box: its cap symbol and the
/// multiplicity it carries for the evaluator (the box itself integrates
/// one variable per block regardless of multiplicity).
#[derive(Clone, Copy, Debug)]
pub struct BoxBlock {
    pub multiplicity: u32,
    pub cap: Symbol,
}

/// Integrate a chamber-wise polynomial integrand over the box
/// `prod_j [0, cap_j]`.
///
/// `bound_vars[j]` is the integration variable of block `j`. The
/// evaluator receives a strict ordering of the blocks (indices sorted by
/// increasing variable value) and must return the integrand polynomial
/// valid on that chamber, written in the corresponding `bound_vars`.
///
/// The box is decomposed into regions on which both the relative order
/// of the variables and every comparison against a cap are fixed: the
/// distinct caps cut `[0, max cap]` into slots, each variable is
/// assigned to a slot below its own cap, and the variables sharing a
/// slot are ordered. On each region the mins are resolved and the
/// iterated antiderivatives are exact, so the sum over regions is the
/// exact integral, returned as a polynomial in the cap symbols.
pub fn box_integral(
    reg: &Arc<VarRegistry>,
    blocks: &[BoxBlock],
    bound_vars: &[Symbol],
    evaluator: &mut dyn FnMut(&[usize]) -> MultiPoly,
) -> Result<MultiPoly> {
    assert_eq!(blocks.len(), bound_vars.len());
    assert!(!blocks.is_empty(), "box_integral needs at least one block");
    for b in blocks {
        if reg.role(b.cap) != VarRole::Tau {
            return Err(Error::UnorderedCap(reg.name(b.cap).to_string()));
        }
    }
    for (i, v) in bound_vars.iter().enumerate() {
        assert_eq!(
            reg.role(*v),
            VarRole::Bound,
            "integration variables must be bound-role"
        );
        assert!(
            !bound_vars[..i].contains(v),
            "integration variables must be distinct"
        );
    }

    // Distinct caps, ascending in the declared tau order.
    let mut dcaps: Vec<Symbol> = blocks.iter().map(|b| b.cap).collect();
    dcaps.sort_by(|&a, &b| reg.tau_cmp(a, b));
    dcaps.dedup();
    let rank_of = |cap: Symbol| dcaps.iter().position(|&d| d == cap).unwrap();

    let l = blocks.len();
    let max_slot: Vec<usize> = blocks.iter().map(|b| rank_of(b.cap)).collect();

    let mut total = MultiPoly::zero(reg);
    let mut integrand_cache: HashMap<Vec<usize>, MultiPoly> = HashMap::new();

    // Odometer over slot assignments g (g[j] in 0..=max_slot[j]).
    let mut g = vec![0usize; l];
    loop {
        integrate_assignment(
            reg,
            &dcaps,
            bound_vars,
            &g,
            evaluator,
            &mut integrand_cache,
            &mut total,
        )?;
        // advance
        let mut j = 0;
        loop {
            if j == l {
                debug_assert!(bound_vars.iter().all(|&v| !total.contains(v)));
                return Ok(total);
            }
            if g[j] < max_slot[j] {
                g[j] += 1;
                break;
            }
            g[j] = 0;
            j += 1;
        }
    }
}

/// Sum over the within-slot orderings of one slot assignment.
fn integrate_assignment(
    reg: &Arc<VarRegistry>,
    dcaps: &[Symbol],
    bound_vars: &[Symbol],
    g: &[usize],
    evaluator: &mut dyn FnMut(&[usize]) -> MultiPoly,
    cache: &mut HashMap<Vec<usize>, MultiPoly>,
    total: &mut MultiPoly,
) -> Result<()> {
    let m = dcaps.len();
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, &q) in g.iter().enumerate() {
        slots[q].push(j);
    }
    let mut orderings: Vec<Vec<usize>> = Vec::new();
    permutations_product(&slots, 0, &mut Vec::new(), &mut orderings);

    for per_slot in orderings {
        // Full chamber: concatenation of the per-slot orders.
        let sigma = per_slot.clone();
        let integrand = cache
            .entry(sigma.clone())
            .or_insert_with(|| evaluator(&sigma))
            .clone();
        if integrand.is_zero() {
            continue;
        }
        // Integrate slot by slot; within slot q (interval
        // [d_{q-1}, d_q]) the chain w_1 <= ... <= w_p integrates
        // innermost-first with upper bound the next chain variable.
        let mut acc = integrand;
        let mut pos = 0;
        for (q, slot) in slots.iter().enumerate() {
            if slot.is_empty() {
                continue;
            }
            let lo = if q == 0 {
                MultiPoly::zero(reg)
            } else {
                MultiPoly::var(reg, dcaps[q - 1])
            };
            let chain: &[usize] = &sigma[pos..pos + slot.len()];
            for (i, &blk) in chain.iter().enumerate() {
                let hi = if i + 1 < chain.len() {
                    MultiPoly::var(reg, bound_vars[chain[i + 1]])
                } else {
                    MultiPoly::var(reg, dcaps[q])
                };
                acc = acc.definite_integral(bound_vars[blk], &lo, &hi)?;
            }
            pos += slot.len();
        }
        *total = total.add(&acc);
    }
    Ok(())
}

/// Cartesian product of permutations of each slot, flattened in slot
/// order (which is the value order of the full chamber).
fn permutations_product(
    slots: &[Vec<usize>],
    q: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if q == slots.len() {
        out.push(prefix.clone());
        return;
    }
    let mut items = slots[q].clone();
    permute(&mut items, 0, &mut |perm| {
        let keep = prefix.len();
        prefix.extend_from_slice(perm);
        permutations_product(slots, q + 1, prefix, out);
        prefix.truncate(keep);
    });
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
