//! Independent computation paths used to cross-check the engines: a
//! brute-force partition-tuple moment formula, hard-coded low-order
//! recursion steps, and numeric quadrature. These trade speed for
//! independence; none of them sits on the production path.

use num_traits::One;

use crate::exactpoly::{
    box_integral, BoxBlock, ChamberPoly, EngineVars, MultiPoly, Rational, Symbol,
};
use crate::hopcumulants::CumulantEngine;
use crate::hopmoments::MomentEngine;
use crate::partitions::set_partitions;
use crate::{Error, Result};

/// Joint moment of order `n` by direct summation over `(k-1)`-tuples of
/// set partitions: each tuple contributes the volume of the polytope
/// cut out of the capped box by the per-index increasing-chain
/// constraints, weighted by one intensity factor per block and level.
/// Term count grows like `Bell(n)^(k-1)`; guarded to `n <= 3`,
/// `k <= 4`. The registry must provide `n (k-1)` integration variables.
pub fn moment_via_partitions(vars: &EngineVars, k: u32, n: u32) -> Result<MultiPoly> {
    if !(2..=4).contains(&k) || !(1..=3).contains(&n) {
        return Err(Error::OutOfRange {
            what: "moment_via_partitions",
            detail: format!("(k, n) = ({k}, {n}), supported k in 2..=4, n in 1..=3"),
        });
    }
    let levels = (k - 1) as usize;
    let max_vars = n as usize * levels;
    if vars.bounds.len() < max_vars || vars.taus.len() < n as usize || vars.lambdas.len() < levels {
        return Err(Error::LimitExceeded(format!(
            "registry too small: need {max_vars} integration variables"
        )));
    }
    let reg = &vars.reg;
    let parts = set_partitions(n as usize)?;
    let mut total = MultiPoly::zero(reg);
    // odometer over Pi[n]^{k-1}
    let mut tuple = vec![0usize; levels];
    loop {
        let chosen: Vec<_> = tuple.iter().map(|&i| &parts[i]).collect();
        // one integration variable per block per level
        let mut offsets = Vec::with_capacity(levels);
        let mut blocks: Vec<BoxBlock> = Vec::new();
        for p in &chosen {
            offsets.push(blocks.len());
            for block in p.blocks() {
                blocks.push(BoxBlock {
                    multiplicity: block.len() as u32,
                    cap: vars.taus[block[0]],
                });
            }
        }
        let total_vars = blocks.len();
        // chains[i] = the variable visited by index i at each level
        let chains: Vec<Vec<usize>> = (0..n as usize)
            .map(|i| {
                chosen
                    .iter()
                    .enumerate()
                    .map(|(l, p)| offsets[l] + p.block_of(i))
                    .collect()
            })
            .collect();
        let mut evaluator = |sigma: &[usize]| {
            let mut pos = vec![0usize; total_vars];
            for (rank, &b) in sigma.iter().enumerate() {
                pos[b] = rank;
            }
            let ok = chains
                .iter()
                .all(|chain| chain.windows(2).all(|w| pos[w[0]] < pos[w[1]]));
            if ok {
                MultiPoly::one(reg)
            } else {
                MultiPoly::zero(reg)
            }
        };
        let volume = box_integral(reg, &blocks, &vars.bounds[..total_vars], &mut evaluator)?;
        let lambda_powers: Vec<(Symbol, u16)> = chosen
            .iter()
            .enumerate()
            .map(|(l, p)| (vars.lambdas[l], p.num_blocks() as u16))
            .collect();
        total = total.add(&volume.mul(&MultiPoly::monomial(reg, Rational::one(), &lambda_powers)));
        // advance the odometer
        let mut l = 0;
        loop {
            if l == levels {
                return Ok(total);
            }
            tuple[l] += 1;
            if tuple[l] < parts.len() {
                break;
            }
            tuple[l] = 0;
            l += 1;
        }
    }
}

fn lambda_factor(vars: &EngineVars, k: u32, count: u16) -> MultiPoly {
    MultiPoly::monomial(
        &vars.reg,
        Rational::one(),
        &[(vars.lambdas[(k - 1) as usize], count)],
    )
}

/// Integrate a one-variable integrand (written in `bounds[0]`) from 0 to
/// `cap`, times `lambda_{k}` — the single-block term of every step.
fn single_block_term(
    vars: &EngineVars,
    k: u32,
    integrand: &MultiPoly,
    cap: Symbol,
) -> Result<MultiPoly> {
    let reg = &vars.reg;
    let zero = MultiPoly::zero(reg);
    let hi = MultiPoly::var(reg, cap);
    Ok(integrand
        .definite_integral(vars.bounds[0], &zero, &hi)?
        .mul(&lambda_factor(vars, k, 1)))
}

/// The order-1/2/3 moment recursion steps from level `k` to `k+1`,
/// written out term by term instead of enumerated. Must reproduce the engine's
/// `moment(k+1, [1; n])`.
pub fn explicit_moment_step(me: &MomentEngine, k: u32, n: u32) -> Result<ChamberPoly> {
    let vars = me.vars().clone();
    let reg = &vars.reg;
    let chain: Vec<Symbol> = vars.taus[..n as usize].to_vec();
    let rename_to_bound = |entry: &ChamberPoly, order: &[usize]| {
        let map: Vec<(Symbol, Symbol)> = order
            .iter()
            .enumerate()
            .map(|(i, &b)| (vars.taus[i], vars.bounds[b]))
            .collect();
        entry.poly.rename(&map)
    };
    let poly = match n {
        1 => {
            // int_0^{tau1} m_{k,1}(u) lambda du
            let m = me.moment(k, &[1])?;
            single_block_term(&vars, k, &rename_to_bound(&m, &[0]), vars.taus[0])?
        }
        2 => {
            // int_0^{tau1} m(u,u) lambda du
            //   + int_0^{tau2} int_0^{tau1} m(u1,u2) lambda^2
            let diag = me.moment(k, &[2])?;
            let t1 = single_block_term(&vars, k, &rename_to_bound(&diag, &[0]), vars.taus[0])?;
            let flat = me.moment(k, &[1, 1])?;
            let boxes = [
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[0],
                },
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[1],
                },
            ];
            let mut eval = |sigma: &[usize]| rename_to_bound(&flat, sigma);
            let t2 = box_integral(reg, &boxes, &vars.bounds[..2], &mut eval)?
                .mul(&lambda_factor(&vars, k, 2));
            t1.add(&t2)
        }
        3 => {
            // the five explicit terms: triple diagonal, the three
            // pair-singleton splits, and the fully distinct cube
            let triple = me.moment(k, &[3])?;
            let mut acc =
                single_block_term(&vars, k, &rename_to_bound(&triple, &[0]), vars.taus[0])?;
            // pair blocks {12}, {13}, {23} with their singleton partner
            for (pair_min, single) in [(0usize, 2usize), (0, 1), (1, 0)] {
                let boxes = [
                    BoxBlock {
                        multiplicity: 2,
                        cap: vars.taus[pair_min],
                    },
                    BoxBlock {
                        multiplicity: 1,
                        cap: vars.taus[single],
                    },
                ];
                let mut eval = |sigma: &[usize]| {
                    let mults: Vec<u32> =
                        sigma.iter().map(|&b| if b == 0 { 2 } else { 1 }).collect();
                    let entry = me.moment(k, &mults).expect("within limits");
                    rename_to_bound(&entry, sigma)
                };
                let term = box_integral(reg, &boxes, &vars.bounds[..2], &mut eval)?
                    .mul(&lambda_factor(&vars, k, 2));
                acc = acc.add(&term);
            }
            let flat = me.moment(k, &[1, 1, 1])?;
            let boxes = [
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[0],
                },
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[1],
                },
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[2],
                },
            ];
            let mut eval = |sigma: &[usize]| rename_to_bound(&flat, sigma);
            let cube = box_integral(reg, &boxes, &vars.bounds[..3], &mut eval)?
                .mul(&lambda_factor(&vars, k, 3));
            acc.add(&cube)
        }
        _ => {
            return Err(Error::OutOfRange {
                what: "explicit_moment_step",
                detail: format!("n = {n}, supported 1..=3"),
            })
        }
    };
    Ok(ChamberPoly::new(poly, chain))
}

/// The hard-coded order-2/3 cumulant recursion steps (distinct
/// arguments) from level `k` to `k+1`. Must reproduce the engine's
/// `cumulant(k+1, [1; n])`.
pub fn explicit_cumulant_step(ce: &CumulantEngine, k: u32, n: u32) -> Result<ChamberPoly> {
    let vars = ce.vars().clone();
    let reg = &vars.reg;
    let chain: Vec<Symbol> = vars.taus[..n as usize].to_vec();
    let rename_to_bound = |entry: &ChamberPoly, order: &[usize]| {
        let map: Vec<(Symbol, Symbol)> = order
            .iter()
            .enumerate()
            .map(|(i, &b)| (vars.taus[i], vars.bounds[b]))
            .collect();
        entry.poly.rename(&map)
    };
    let poly = match n {
        2 => {
            let diag = ce.cumulant(k, &[2])?;
            let t1 = single_block_term(&vars, k, &rename_to_bound(&diag, &[0]), vars.taus[0])?;
            let flat = ce.cumulant(k, &[1, 1])?;
            let boxes = [
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[0],
                },
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[1],
                },
            ];
            let mut eval = |sigma: &[usize]| rename_to_bound(&flat, sigma);
            let t2 = box_integral(reg, &boxes, &vars.bounds[..2], &mut eval)?
                .mul(&lambda_factor(&vars, k, 2));
            t1.add(&t2)
        }
        3 => {
            let triple = ce.cumulant(k, &[3])?;
            let mut acc =
                single_block_term(&vars, k, &rename_to_bound(&triple, &[0]), vars.taus[0])?;
            for (pair_min, single) in [(0usize, 2usize), (0, 1), (1, 0)] {
                let boxes = [
                    BoxBlock {
                        multiplicity: 2,
                        cap: vars.taus[pair_min],
                    },
                    BoxBlock {
                        multiplicity: 1,
                        cap: vars.taus[single],
                    },
                ];
                let mut eval = |sigma: &[usize]| {
                    let mults: Vec<u32> =
                        sigma.iter().map(|&b| if b == 0 { 2 } else { 1 }).collect();
                    let entry = ce.cumulant(k, &mults).expect("within limits");
                    rename_to_bound(&entry, sigma)
                };
                let term = box_integral(reg, &boxes, &vars.bounds[..2], &mut eval)?
                    .mul(&lambda_factor(&vars, k, 2));
                acc = acc.add(&term);
            }
            let flat = ce.cumulant(k, &[1, 1, 1])?;
            let boxes = [
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[0],
                },
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[1],
                },
                BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[2],
                },
            ];
            let mut eval = |sigma: &[usize]| rename_to_bound(&flat, sigma);
            let cube = box_integral(reg, &boxes, &vars.bounds[..3], &mut eval)?
                .mul(&lambda_factor(&vars, k, 3));
            acc.add(&cube)
        }
        _ => {
            return Err(Error::OutOfRange {
                what: "explicit_cumulant_step",
                detail: format!("n = {n}, supported 2..=3 (order 4 is equal-offset only)"),
            })
        }
    };
    Ok(ChamberPoly::new(poly, chain))
}

/// The order-4 cumulant step at equal offsets: the five partition types
/// of a 4-set with their counts 1, 4, 3, 6, 1. Returns a polynomial in
/// the single `tau`; must reproduce `cumulant(k+1, [1,1,1,1])` there.
pub fn explicit_cumulant_step4_equal(ce: &CumulantEngine, k: u32) -> Result<MultiPoly> {
    let vars = ce.vars().clone();
    let reg = &vars.reg;
    let cap = vars.taus[0];
    let rename_to_bound = |entry: &ChamberPoly, order: &[usize]| {
        let map: Vec<(Symbol, Symbol)> = order
            .iter()
            .enumerate()
            .map(|(i, &b)| (vars.taus[i], vars.bounds[b]))
            .collect();
        entry.poly.rename(&map)
    };
    // (multiplicity pattern, count of partitions of that type)
    let types: [(&[u32], i64); 5] = [
        (&[4], 1),
        (&[1, 3], 4),
        (&[2, 2], 3),
        (&[1, 1, 2], 6),
        (&[1, 1, 1, 1], 1),
    ];
    let mut acc = MultiPoly::zero(reg);
    for (pattern, count) in types {
        let l = pattern.len();
        let boxes: Vec<BoxBlock> = (0..l)
            .map(|_| BoxBlock {
                multiplicity: 1,
                cap,
            })
            .collect();
        let mut eval = |sigma: &[usize]| {
            let mults: Vec<u32> = sigma.iter().map(|&b| pattern[b]).collect();
            let entry = ce.cumulant(k, &mults).expect("within limits");
            rename_to_bound(&entry, sigma)
        };
        let term = box_integral(reg, &boxes, &vars.bounds[..l], &mut eval)?
            .mul(&lambda_factor(&vars, k, l as u16))
            .mul(&MultiPoly::from_int(reg, count));
        acc = acc.add(&term);
    }
    Ok(acc.rename(&[(cap, vars.tau)]))
}

/// Midpoint-rule integral over the box `prod [0, caps_i]`, refining the
/// per-axis grid by doubling until the relative change drops below
/// 1e-4 or the evaluation budget runs out. Numeric oracle for
/// [`box_integral`]; dimensions above 4 are rejected.
pub fn quadrature(f: &dyn Fn(&[f64]) -> f64, caps: &[f64], grid: u32) -> Result<f64> {
    let d = caps.len();
    if d == 0 || d > 4 {
        return Err(Error::OutOfRange {
            what: "quadrature",
            detail: format!("dimension {d}, supported 1..=4"),
        });
    }
    if grid < 2 {
        return Err(Error::OutOfRange {
            what: "quadrature",
            detail: "grid >= 2".into(),
        });
    }
    let budget: u64 = 40_000_000;
    let mut m = grid as u64;
    let mut prev = midpoint_pass(f, caps, m);
    loop {
        let next_m = m * 2;
        if next_m.pow(d as u32) > budget {
            return Ok(prev);
        }
        let cur = midpoint_pass(f, caps, next_m);
        let denom = cur.abs().max(1e-12);
        if ((cur - prev) / denom).abs() < 1e-4 {
            return Ok(cur);
        }
        prev = cur;
        m = next_m;
    }
}

fn midpoint_pass(f: &dyn Fn(&[f64]) -> f64, caps: &[f64], m: u64) -> f64 {
    let d = caps.len();
    let steps: Vec<f64> = caps.iter().map(|&c| c / m as f64).collect();
    let cell: f64 = steps.iter().product();
    let mut idx = vec![0u64; d];
    let mut x = vec![0f64; d];
    let mut total = 0.0;
    loop {
        for i in 0..d {
            x[i] = (idx[i] as f64 + 0.5) * steps[i];
        }
        total += f(&x);
        let mut i = 0;
        loop {
            if i == d {
                return total * cell;
            }
            idx[i] += 1;
            if idx[i] < m {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use std::collections::HashMap;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn quadrature_known_integrals() {
        // int_0^1 u^2 = 1/3
        let got = quadrature(&|x: &[f64]| x[0] * x[0], &[1.0], 8).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-4, "got {got}");
        // min over the unit square: 1/3
        let got = quadrature(&|x: &[f64]| x[0].min(x[1]), &[1.0, 1.0], 8).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-3, "got {got}");
        // min over [0, 1/2] x [0, 1]: 5/48
        let got = quadrature(&|x: &[f64]| x[0].min(x[1]), &[0.5, 1.0], 8).unwrap();
        assert!((got - 5.0 / 48.0).abs() < 1e-3, "got {got}");
        // guards
        assert!(quadrature(&|_| 1.0, &[1.0; 5], 8).is_err());
        assert!(quadrature(&|_| 1.0, &[1.0], 1).is_err());
    }

    #[test]
    fn quadrature_agrees_with_box_integral_on_random_cases() {
        // pseudo-random integrands min^a * max^b * prod u_i^c over
        // boxes with random rational caps
        let vars = EngineVars::new(3, 4);
        let reg = &vars.reg;
        let mut state = 77u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for case in 0..50 {
            let d = 1 + next() % 3;
            let a = (next() % 3) as u16;
            let b = (next() % 2) as u16;
            let c = (next() % 2) as u16;
            // caps ascending among tau1..tau{d}
            let caps_q: Vec<Rational> = {
                let mut v: Vec<i64> = (0..d).map(|_| 1 + (next() % 8) as i64).collect();
                v.sort_unstable();
                v.into_iter().map(|x| q(x, 4)).collect()
            };
            let blocks: Vec<BoxBlock> = (0..d)
                .map(|j| BoxBlock {
                    multiplicity: 1,
                    cap: vars.taus[j],
                })
                .collect();
            let mut eval = |sigma: &[usize]| {
                let mut p = MultiPoly::monomial(
                    reg,
                    Rational::one(),
                    &[(vars.bounds[sigma[0]], a), (vars.bounds[sigma[d - 1]], b)],
                );
                for j in 0..d {
                    p = p.mul(&MultiPoly::monomial(
                        reg,
                        Rational::one(),
                        &[(vars.bounds[j], c)],
                    ));
                }
                p
            };
            let exact_poly = box_integral(reg, &blocks, &vars.bounds[..d], &mut eval).unwrap();
            let mut assignment = HashMap::new();
            for (j, cap) in caps_q.iter().enumerate() {
                assignment.insert(vars.taus[j], cap.clone());
            }
            let exact = exact_poly.eval(&assignment).unwrap();
            let exact_f = crate::exactpoly::rational_to_f64(&exact);
            let caps_f: Vec<f64> = caps_q
                .iter()
                .map(crate::exactpoly::rational_to_f64)
                .collect();
            let f = move |x: &[f64]| {
                let mn = x.iter().cloned().fold(f64::INFINITY, f64::min);
                let mx = x.iter().cloned().fold(0.0f64, f64::max);
                mn.powi(a as i32)
                    * mx.powi(b as i32)
                    * x.iter().map(|&v| v.powi(c as i32)).product::<f64>()
            };
            let approx = quadrature(&f, &caps_f, 16).unwrap();
            let denom = exact_f.abs().max(1e-9);
            assert!(
                ((approx - exact_f) / denom).abs() < 1e-3,
                "case {case}: exact {exact_f}, quadrature {approx}"
            );
        }
    }

    #[test]
    fn partition_tuple_moment_small_cases() {
        let vars = EngineVars::new(4, 6);
        // k=3, n=1: lambda1 lambda2 tau^2/2
        let got = moment_via_partitions(&vars, 3, 1).unwrap();
        assert_eq!(got.canonical_string(), "1/2*lambda1*lambda2*tau1^2");
        // k=2, n=2: lambda1 tau1 + lambda1^2 tau1 tau2
        let got = moment_via_partitions(&vars, 2, 2).unwrap();
        assert_eq!(got.canonical_string(), "lambda1*tau1 + lambda1^2*tau1*tau2");
        // guards
        assert!(moment_via_partitions(&vars, 5, 1).is_err());
        assert!(moment_via_partitions(&vars, 3, 4).is_err());
    }

    #[test]
    fn partition_tuple_moment_matches_engine_on_grid() {
        let me = MomentEngine::new(5, 6);
        for (k, n) in [
            (2u32, 1u32),
            (2, 2),
            (2, 3),
            (3, 1),
            (3, 2),
            (3, 3),
            (4, 1),
            (4, 2),
        ] {
            let oracle = moment_via_partitions(me.vars(), k, n).unwrap();
            let engine = me.moment(k, &vec![1; n as usize]).unwrap();
            assert_eq!(oracle, engine.poly, "k={k} n={n}");
        }
    }

    #[test]
    fn explicit_moment_steps_match_engine() {
        let me = MomentEngine::new(4, 4);
        for k in [2u32, 3] {
            for n in [1u32, 2] {
                let step = explicit_moment_step(&me, k, n).unwrap();
                let engine = me.moment(k + 1, &vec![1; n as usize]).unwrap();
                assert_eq!(step, engine, "k={k} n={n}");
            }
        }
        let step = explicit_moment_step(&me, 2, 3).unwrap();
        let engine = me.moment(3, &[1, 1, 1]).unwrap();
        assert_eq!(step, engine);
    }

    #[test]
    fn explicit_cumulant_steps_match_engine() {
        let ce = CumulantEngine::new(3, 4);
        for n in [2u32, 3] {
            let step = explicit_cumulant_step(&ce, 2, n).unwrap();
            let engine = ce.cumulant(3, &vec![1; n as usize]).unwrap();
            assert_eq!(step, engine, "n={n}");
        }
        let step4 = explicit_cumulant_step4_equal(&ce, 2).unwrap();
        let engine4 = ce.cumulant_equal(3, 4).unwrap();
        assert_eq!(step4, engine4);
    }
}
