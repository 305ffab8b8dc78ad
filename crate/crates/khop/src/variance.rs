//! Closed-form variance of the k-hop count: general per-cell
//! intensities, the equal-intensity specialization, and the large-lambda
//! asymptotic, all exact.

use std::collections::HashMap;

use num_integer::binomial;
use num_traits::{One, Signed};

use crate::exactpoly::{EngineVars, MultiPoly, Rational};
use crate::{Error, Result};

/// Variance as a polynomial in `tau` and `lambda1..lambda{k-1}`:
///
/// `sum_{l=1}^{k-1} tau^{2k-2-l} (prod lambda_i^2) / (2k-2-l)!
///    sum_{j_0+..+j_l = k-1-l} prod_q 1/lambda_{j_0+..+j_{q-1}+q}
///    prod_p C(2 j_p, j_p)`.
pub fn variance_general(vars: &EngineVars, k: u32) -> Result<MultiPoly> {
    if !(2..=8).contains(&k) {
        return Err(Error::OutOfRange {
            what: "variance_general",
            detail: format!("k = {k}, supported 2..=8"),
        });
    }
    if vars.k_max() < k {
        return Err(Error::LimitExceeded(format!(
            "registry holds lambdas up to {}",
            vars.k_max() - 1
        )));
    }
    let reg = &vars.reg;
    let mut total = MultiPoly::zero(reg);
    for l in 1..=(k - 1) as usize {
        let tau_pow = (2 * k - 2) as usize - l;
        let mut inv_factorial = Rational::one();
        for i in 2..=tau_pow {
            inv_factorial /= Rational::from_integer((i as i64).into());
        }
        let mut sum_over_compositions = MultiPoly::zero(reg);
        let target = (k - 1) as usize - l;
        let mut js = vec![0usize; l + 1];
        compositions(target, l + 1, &mut js, 0, &mut |js| {
            // singleton positions i_q = j_0 + .. + j_{q-1} + q carry a
            // single lambda power; all other cells carry lambda^2
            let mut coeff = Rational::one();
            for &j in js.iter() {
                coeff *= Rational::from_integer(binomial(2 * j as i64, j as i64).into());
            }
            let mut exps = vec![2u16; (k - 1) as usize];
            let mut prefix = 0usize;
            for (q, &j) in js.iter().enumerate().take(l) {
                prefix += j;
                let cell = prefix + q; // 0-based index of the q-th singleton
                exps[cell] -= 1;
            }
            let powers: Vec<_> = exps
                .iter()
                .enumerate()
                .map(|(i, &e)| (vars.lambdas[i], e))
                .collect();
            sum_over_compositions =
                sum_over_compositions.add(&MultiPoly::monomial(reg, coeff, &powers));
        });
        let term = sum_over_compositions
            .scale(&inv_factorial)
            .mul(&MultiPoly::monomial(
                reg,
                Rational::one(),
                &[(vars.tau, tau_pow as u16)],
            ));
        total = total.add(&term);
    }
    Ok(total)
}

fn compositions(
    target: usize,
    parts: usize,
    js: &mut Vec<usize>,
    idx: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == parts - 1 {
        js[idx] = target;
        visit(js);
        return;
    }
    for v in 0..=target {
        js[idx] = v;
        compositions(target - v, parts, js, idx + 1, visit);
    }
}

/// Equal intensities: variance as a polynomial in `tau` and `lambda`,
///
/// `1/(k-1)! sum_{l=0}^{k-2} C(k-1,l) (lambda tau)^{k-1+l} G(k,l)`
///
/// where the gamma-function ratio `G(k,l)` telescopes to the rational
/// `1 / prod_{i=1}^{l} ((k-1-l)/2 + i)` (both gamma arguments share the
/// same fractional part, so no gamma evaluation takes place).
pub fn variance_equal(vars: &EngineVars, k: u32) -> Result<MultiPoly> {
    equal_intensity_sum(vars, k, (k - 2) as i64)
}

/// Second moment: the same sum extended to `l = k-1`; the extra term is
/// exactly the squared mean.
pub fn second_moment_equal(vars: &EngineVars, k: u32) -> Result<MultiPoly> {
    equal_intensity_sum(vars, k, (k - 1) as i64)
}

fn equal_intensity_sum(vars: &EngineVars, k: u32, l_top: i64) -> Result<MultiPoly> {
    if !(2..=12).contains(&k) {
        return Err(Error::OutOfRange {
            what: "variance_equal",
            detail: format!("k = {k}, supported 2..=12"),
        });
    }
    let reg = &vars.reg;
    let mut inv_factorial = Rational::one();
    for i in 2..=(k - 1) as i64 {
        inv_factorial /= Rational::from_integer(i.into());
    }
    let mut total = MultiPoly::zero(reg);
    for l in 0..=l_top {
        let mut coeff =
            inv_factorial.clone() * Rational::from_integer(binomial((k - 1) as i64, l).into());
        // gamma ratio as a telescoping product
        for i in 1..=l {
            let factor = Rational::new(((k as i64) - 1 - l).into(), 2.into())
                + Rational::from_integer(i.into());
            coeff /= factor;
        }
        let e = ((k - 1) as i64 + l) as u16;
        total = total.add(&MultiPoly::monomial(
            reg,
            coeff,
            &[(vars.lambda, e), (vars.tau, e)],
        ));
    }
    Ok(total)
}

/// Exact evaluation of the equal-intensity variance.
pub fn variance_equal_at(k: u32, lambda: &Rational, tau: &Rational) -> Result<Rational> {
    let vars = EngineVars::new(2, 1);
    let poly = variance_equal(&vars, k)?;
    let mut assignment = HashMap::new();
    assignment.insert(vars.lambda, lambda.clone());
    assignment.insert(vars.tau, tau.clone());
    poly.eval(&assignment)
}

/// Exact evaluation of the equal-intensity second moment.
pub fn second_moment_equal_at(k: u32, lambda: &Rational, tau: &Rational) -> Result<Rational> {
    let vars = EngineVars::new(2, 1);
    let poly = second_moment_equal(&vars, k)?;
    let mut assignment = HashMap::new();
    assignment.insert(vars.lambda, lambda.clone());
    assignment.insert(vars.tau, tau.clone());
    poly.eval(&assignment)
}

/// Leading-term variance `(2 lambda tau)^{2k-3} / (2 (2k-3)!)`; the
/// equal-intensity variance divided by this tends to one as lambda
/// grows.
pub fn variance_asymptotic(k: u32, lambda: &Rational, tau: &Rational) -> Result<Rational> {
    if k < 2 {
        return Err(Error::OutOfRange {
            what: "variance_asymptotic",
            detail: "k >= 2".into(),
        });
    }
    if lambda.is_negative() || tau.is_negative() {
        return Err(Error::NegativeArgument("variance_asymptotic".into()));
    }
    let e = 2 * k as i64 - 3;
    let mut out = Rational::new(1.into(), 2.into());
    let base = lambda * tau * Rational::from_integer(2.into());
    for _ in 0..e {
        out *= &base;
    }
    for i in 2..=e {
        out /= Rational::from_integer(i.into());
    }
    Ok(out)
}
