//! Joint moments of k-hop counts, computed by exact recursion.
//!
//! The engine memoizes, per hop count `k` and multiplicity vector, the
//! joint moment `E[prod_j count_j^{n_j}]` of k-hop counts observed at
//! endpoint offsets `v_1 <= ... <= v_p`, as an exact polynomial on that
//! chamber in the offsets and the per-cell intensities
//! `lambda1..lambda{k-1}`. One hop has a unique path, so the `k = 1`
//! table entry is the constant 1; the step from `k` to `k+1` sums over
//! set partitions of the argument indices and integrates the grouped
//! lower-order moment over a box capped by the per-block argument
//! minima, picking up one factor of the newly added cell's intensity
//! per integration variable.
//!
//! Coincident arguments are obtained from the distinct-argument entry by
//! substitution; [`MomentEngine::moment_grouped_direct`] recomputes them
//! through the recursion itself and exists so tests can cross-check the
//! two routes.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};

use crate::exactpoly::{
    box_integral, BoxBlock, ChamberPoly, EngineVars, MultiPoly, Rational, Symbol,
};
use crate::partitions::{set_partitions, stirling2};
use crate::{Error, Result};

/// Default soft limits; construct the engine with larger maxima to
/// override.
pub const DEFAULT_K_MAX: u32 = 5;
pub const DEFAULT_N_MAX: u32 = 6;

/// Result of a pointwise evaluation; `inputs_sorted` is false when the
/// offsets had to be sorted first.
#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub value: Rational,
    pub inputs_sorted: bool,
}

pub struct MomentEngine {
    vars: EngineVars,
    flat: Mutex<HashMap<(u32, u32), ChamberPoly>>,
    grouped: Mutex<HashMap<(u32, Vec<u32>), ChamberPoly>>,
    prepare_lock: Mutex<()>,
}

impl MomentEngine {
    pub fn new(k_max: u32, n_max: u32) -> Self {
        MomentEngine {
            vars: EngineVars::new(k_max.max(2), n_max.max(1)),
            flat: Mutex::new(HashMap::new()),
            grouped: Mutex::new(HashMap::new()),
            prepare_lock: Mutex::new(()),
        }
    }

    pub fn vars(&self) -> &EngineVars {
        &self.vars
    }

    pub fn k_max(&self) -> u32 {
        self.vars.k_max()
    }

    pub fn n_max(&self) -> u32 {
        self.vars.n_max()
    }

    fn check_limits(&self, k: u32, n: u32) -> Result<()> {
        if k < 1 || k > self.k_max() {
            return Err(Error::LimitExceeded(format!(
                "k = {k}, engine built for 1..={}",
                self.k_max()
            )));
        }
        if n < 1 || n > self.n_max() {
            return Err(Error::LimitExceeded(format!(
                "total order {n}, engine built for 1..={}",
                self.n_max()
            )));
        }
        Ok(())
    }

    /// Fill the memo for every `(k', n')` up to the given bounds. After
    /// this pass the table is read-only; concurrent `prepare` calls
    /// serialize on an internal lock.
    pub fn prepare(&self, k: u32, n: u32) -> Result<()> {
        let _guard = self.prepare_lock.lock().unwrap();
        for nn in 1..=n {
            for kk in 1..=k {
                self.flat(kk, nn)?;
            }
        }
        Ok(())
    }

    /// Joint moment for the multiplicity vector `mults`, as a polynomial
    /// on the chamber `tau1 <= ... <= tau_p` (argument j has power
    /// `mults[j]`).
    pub fn moment(&self, k: u32, mults: &[u32]) -> Result<ChamberPoly> {
        let n: u32 = validate_mults(mults)?;
        self.check_limits(k, n)?;
        if mults.iter().all(|&m| m == 1) {
            return self.flat(k, n);
        }
        let key = (k, mults.to_vec());
        if let Some(hit) = self.grouped.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let flat = self.flat(k, n)?;
        let entry = self.group_flat(&flat, mults);
        self.grouped.lock().unwrap().insert(key, entry.clone());
        Ok(entry)
    }

    /// All arguments coincident: polynomial in `tau` and the lambdas.
    pub fn moment_equal(&self, k: u32, n: u32) -> Result<MultiPoly> {
        Ok(self.flat(k, n)?.all_equal(self.vars.tau))
    }

    /// Evaluate the joint moment at exact offsets and intensities.
    /// `lambdas` must hold one value per cell `1..k-1` (empty for
    /// `k = 1`). Unsorted offsets are sorted first and flagged; negative
    /// values are rejected.
    pub fn moment_at(
        &self,
        k: u32,
        taus: &[Rational],
        lambdas: &[Rational],
    ) -> Result<EvalOutcome> {
        if taus.iter().any(|t| t.is_negative()) {
            return Err(Error::NegativeArgument("endpoint offset".into()));
        }
        if lambdas.iter().any(|l| l.is_negative()) {
            return Err(Error::NegativeArgument("intensity".into()));
        }
        if lambdas.len() + 1 != k as usize {
            return Err(Error::InvalidConfig(format!(
                "expected {} intensities for k = {k}, got {}",
                k - 1,
                lambdas.len()
            )));
        }
        let inputs_sorted = taus.windows(2).all(|w| w[0] <= w[1]);
        let mut sorted = taus.to_vec();
        sorted.sort();
        let (values, mults) = group_sorted(&sorted);
        let entry = self.moment(k, &mults)?;
        let mut assignment = HashMap::new();
        for (j, v) in values.iter().enumerate() {
            assignment.insert(self.vars.taus[j], v.clone());
        }
        for (i, l) in lambdas.iter().enumerate() {
            assignment.insert(self.vars.lambdas[i], l.clone());
        }
        Ok(EvalOutcome {
            value: entry.poly.eval(&assignment)?,
            inputs_sorted,
        })
    }

    fn flat(&self, k: u32, n: u32) -> Result<ChamberPoly> {
        self.check_limits(k, n)?;
        if let Some(hit) = self.flat.lock().unwrap().get(&(k, n)) {
            return Ok(hit.clone());
        }
        let chain: Vec<Symbol> = self.vars.taus[..n as usize].to_vec();
        let entry = if k == 1 {
            ChamberPoly::new(MultiPoly::one(&self.vars.reg), chain)
        } else {
            let groups: Vec<usize> = (0..n as usize).collect();
            ChamberPoly::new(self.recursion_step(k, &groups)?, chain)
        };
        self.flat.lock().unwrap().insert((k, n), entry.clone());
        Ok(entry)
    }

    /// Coincident arguments by substitution into the distinct-argument
    /// polynomial: group j absorbs the next `mults[j]` chamber variables.
    fn group_flat(&self, flat: &ChamberPoly, mults: &[u32]) -> ChamberPoly {
        let mut map = Vec::new();
        let mut src = 0usize;
        for (j, &m) in mults.iter().enumerate() {
            for _ in 0..m {
                map.push((self.vars.taus[src], self.vars.taus[j]));
                src += 1;
            }
        }
        ChamberPoly::new(
            flat.poly.rename(&map),
            self.vars.taus[..mults.len()].to_vec(),
        )
    }

    /// One recursion step: the order-n moment at level `k` from grouped
    /// moments at level `k-1`. `groups[i]` maps expanded argument `i` to
    /// its chamber variable (non-decreasing). The flat case is the
    /// identity map; the cross-check path passes coincident groups.
    fn recursion_step(&self, k: u32, groups: &[usize]) -> Result<MultiPoly> {
        debug_assert!(k >= 2);
        let n = groups.len();
        let reg = &self.vars.reg;
        // The integrands below are grouped entries at level k-1 with
        // total order n; materialize the flat entry once so the closure
        // can derive them infallibly.
        self.flat(k - 1, n as u32)?;
        let lambda_new = self.vars.lambdas[(k - 2) as usize];
        let mut acc = MultiPoly::zero(reg);
        for part in set_partitions(n)? {
            let blocks = part.blocks();
            let l = blocks.len();
            let boxes: Vec<BoxBlock> = blocks
                .iter()
                .map(|b| BoxBlock {
                    multiplicity: b.len() as u32,
                    cap: self.vars.taus[groups[b[0]]],
                })
                .collect();
            let mut evaluator = |sigma: &[usize]| {
                let mults: Vec<u32> = sigma.iter().map(|&bi| blocks[bi].len() as u32).collect();
                let grouped = self
                    .moment(k - 1, &mults)
                    .expect("level k-1 entry exists after flat() above");
                let map: Vec<(Symbol, Symbol)> = (0..l)
                    .map(|i| (self.vars.taus[i], self.vars.bounds[sigma[i]]))
                    .collect();
                grouped.poly.rename(&map)
            };
            let integral = box_integral(reg, &boxes, &self.vars.bounds[..l], &mut evaluator)?;
            let weighted = integral.mul(&MultiPoly::monomial(
                reg,
                Rational::one(),
                &[(lambda_new, l as u16)],
            ));
            acc = acc.add(&weighted);
        }
        Ok(acc)
    }

    /// Cross-check route: compute a coincident-argument moment directly
    /// through the recursion instead of by substitution.
    pub fn moment_grouped_direct(&self, k: u32, mults: &[u32]) -> Result<ChamberPoly> {
        let n = validate_mults(mults)?;
        self.check_limits(k, n)?;
        let chain: Vec<Symbol> = self.vars.taus[..mults.len()].to_vec();
        if k == 1 {
            return Ok(ChamberPoly::new(MultiPoly::one(&self.vars.reg), chain));
        }
        let mut groups = Vec::new();
        for (j, &m) in mults.iter().enumerate() {
            groups.extend(std::iter::repeat_n(j, m as usize));
        }
        Ok(ChamberPoly::new(self.recursion_step(k, &groups)?, chain))
    }
}

fn validate_mults(mults: &[u32]) -> Result<u32> {
    if mults.is_empty() || mults.contains(&0) {
        return Err(Error::InvalidConfig(
            "multiplicity vector must be nonempty with entries >= 1".into(),
        ));
    }
    Ok(mults.iter().sum())
}

fn group_sorted(sorted: &[Rational]) -> (Vec<Rational>, Vec<u32>) {
    let mut values: Vec<Rational> = Vec::new();
    let mut mults: Vec<u32> = Vec::new();
    for t in sorted {
        if values.last() == Some(t) {
            *mults.last_mut().unwrap() += 1;
        } else {
            values.push(t.clone());
            mults.push(1);
        }
    }
    (values, mults)
}

/// Upper bound on the order-n moment with every offset below `tau`:
/// the (k-1)-th power of the order-n raw Poisson moment at mean
/// `lambda * tau`, i.e. `(sum_l S(n,l) (lambda tau)^l)^(k-1)`.
pub fn moment_bound(k: u32, n: u32, lambda: &Rational, tau: &Rational) -> Result<Rational> {
    if lambda.is_negative() || tau.is_negative() {
        return Err(Error::NegativeArgument("moment_bound".into()));
    }
    if k < 1 {
        return Err(Error::OutOfRange {
            what: "moment_bound",
            detail: "k >= 1".into(),
        });
    }
    if n == 0 {
        return Ok(Rational::one());
    }
    let lt = lambda * tau;
    let mut poisson_moment = Rational::zero();
    let mut power = Rational::one();
    for l in 1..=n {
        power *= &lt;
        let s = stirling2(n as usize, l as usize)?;
        poisson_moment += Rational::from_integer(s.into()) * &power;
    }
    let mut out = Rational::one();
    for _ in 1..k {
        out *= &poisson_moment;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn engine() -> MomentEngine {
        MomentEngine::new(4, 4)
    }

    #[test]
    fn two_hop_moments_are_poisson_joint_moments() {
        let me = engine();
        // first: lambda1 * tau1
        let m1 = me.moment(2, &[1]).unwrap();
        assert_eq!(m1.poly.canonical_string(), "lambda1*tau1");
        // second joint: lambda1 tau1 + lambda1^2 tau1 tau2 on tau1 <= tau2
        let m2 = me.moment(2, &[1, 1]).unwrap();
        assert_eq!(
            m2.poly.canonical_string(),
            "lambda1*tau1 + lambda1^2*tau1*tau2"
        );
        // third and fourth joint moments at lambda1 = 1 match the
        // two-hop closed forms
        let m3 = me.moment(2, &[1, 1, 1]).unwrap();
        let m3 = m3
            .poly
            .substitute_value(me.vars().lambdas[0], &Rational::one());
        assert_eq!(
            m3.canonical_string(),
            "tau1 + 2*tau1*tau2 + tau1*tau3 + tau1*tau2*tau3"
        );
        let m4 = me.moment(2, &[1, 1, 1, 1]).unwrap();
        let m4 = m4
            .poly
            .substitute_value(me.vars().lambdas[0], &Rational::one());
        assert_eq!(
            m4.canonical_string(),
            "tau1 + 4*tau1*tau2 + 2*tau1*tau3 + tau1*tau4 + 3*tau1*tau2*tau3 \
             + 2*tau1*tau2*tau4 + tau1*tau3*tau4 + tau1*tau2*tau3*tau4"
        );
    }

    #[test]
    fn first_moments_are_scaled_simplex_volumes() {
        // E[count] = lambda1...lambda_{k-1} tau^{k-1} / (k-1)!
        let me = engine();
        let m = me.moment(3, &[1]).unwrap();
        assert_eq!(m.poly.canonical_string(), "1/2*lambda1*lambda2*tau1^2");
        let m = me.moment(4, &[1]).unwrap();
        assert_eq!(
            m.poly.canonical_string(),
            "1/6*lambda1*lambda2*lambda3*tau1^3"
        );
    }

    #[test]
    fn three_hop_equal_argument_moments() {
        let me = engine();
        let lam = Rational::one();
        // n = 2: tau^2/2 + 2 tau^3/3 + tau^4/4
        let m = me.moment_equal(3, 2).unwrap();
        let m = m
            .substitute_value(me.vars().lambdas[0], &lam)
            .substitute_value(me.vars().lambdas[1], &lam);
        assert_eq!(m.canonical_string(), "1/2*tau^2 + 2/3*tau^3 + 1/4*tau^4");
        // grouped key [2] agrees
        let g = me.moment(3, &[2]).unwrap();
        let g = g
            .poly
            .substitute_value(me.vars().lambdas[0], &lam)
            .substitute_value(me.vars().lambdas[1], &lam)
            .rename(&[(me.vars().taus[0], me.vars().tau)]);
        assert_eq!(g.canonical_string(), "1/2*tau^2 + 2/3*tau^3 + 1/4*tau^4");
    }

    #[test]
    fn moment_at_matches_closed_forms() {
        let me = engine();
        // Third moment of the three-hop count at tau = 1: 49/8.
        let got = me
            .moment_at(3, &[q(1, 1), q(1, 1), q(1, 1)], &[q(1, 1), q(1, 1)])
            .unwrap();
        assert!(got.inputs_sorted);
        assert_eq!(got.value, q(49, 8));
        // Second joint moment of the two-hop count at (1/2, 1).
        let got = me.moment_at(2, &[q(1, 2), q(1, 1)], &[q(1, 1)]).unwrap();
        assert_eq!(got.value, q(1, 1));
        // Zero offsets kill every path for k >= 2.
        for k in 2..=4 {
            let zeros = vec![Rational::zero(); 2];
            let lams = vec![Rational::one(); (k - 1) as usize];
            assert_eq!(
                me.moment_at(k, &zeros, &lams).unwrap().value,
                Rational::zero()
            );
        }
        // Unsorted offsets are flagged and sorted.
        let got = me.moment_at(2, &[q(1, 1), q(1, 2)], &[q(1, 1)]).unwrap();
        assert!(!got.inputs_sorted);
        assert_eq!(got.value, q(1, 1));
        // Negative offsets rejected.
        assert!(me.moment_at(2, &[q(-1, 1)], &[q(1, 1)]).is_err());
    }

    #[test]
    fn grouped_direct_route_agrees_with_substitution() {
        let me = engine();
        for (k, mults) in [
            (2u32, vec![2u32]),
            (2, vec![2, 1]),
            (3, vec![2]),
            (3, vec![2, 1]),
            (3, vec![3]),
            (3, vec![2, 2]),
            (4, vec![2, 1]),
        ] {
            let via_subst = me.moment(k, &mults).unwrap();
            let direct = me.moment_grouped_direct(k, &mults).unwrap();
            assert_eq!(via_subst, direct, "k={k} mults={mults:?}");
        }
    }

    #[test]
    fn degree_bounds_on_memoized_entries() {
        // On the sorted chamber the smallest argument absorbs the min
        // structure, so the sharp bounds are: total offset degree at
        // most (k-1) * sum(n_j), and degree in the largest argument at
        // most (k-1) * n_p.
        let me = engine();
        for (k, mults) in [
            (2u32, vec![1u32, 2]),
            (3, vec![1, 1]),
            (3, vec![2, 2]),
            (4, vec![3]),
            (4, vec![1, 1]),
        ] {
            let entry = me.moment(k, &mults).unwrap();
            let n: u32 = mults.iter().sum();
            let total = entry.poly.total_degree_in(&entry.chain);
            assert!(
                total <= (k - 1) * n,
                "k={k} mults={mults:?}: total degree {total}"
            );
            let last = *entry.chain.last().unwrap();
            let d = entry.poly.degree_in(last) as u32;
            assert!(
                d <= (k - 1) * mults[mults.len() - 1],
                "k={k} mults={mults:?}: degree {d} in largest argument"
            );
        }
    }

    #[test]
    fn moment_at_is_symmetric_under_argument_permutation() {
        let me = engine();
        let lams = [q(2, 1), q(1, 2)];
        let a = me
            .moment_at(3, &[q(1, 3), q(1, 2), q(1, 2)], &lams)
            .unwrap();
        let b = me
            .moment_at(3, &[q(1, 2), q(1, 3), q(1, 2)], &lams)
            .unwrap();
        assert_eq!(a.value, b.value);
        assert!(!b.inputs_sorted);
    }

    #[test]
    fn positivity_at_nonnegative_points() {
        let me = engine();
        let pts = [q(0, 1), q(1, 3), q(1, 2), q(1, 1)];
        for k in 1..=3u32 {
            let lams = vec![q(2, 1); (k - 1) as usize];
            for t in &pts {
                let v = me.moment_at(k, &[t.clone(), t.clone()], &lams).unwrap();
                assert!(v.value >= Rational::zero());
            }
        }
    }

    #[test]
    fn bound_dominates_moments() {
        // E[count^n] <= (Poisson moment)^{k-1}, equality at k = 2.
        let one = Rational::one();
        assert_eq!(moment_bound(2, 1, &one, &one).unwrap(), one);
        assert_eq!(moment_bound(3, 3, &one, &one).unwrap(), q(25, 1));
        assert_eq!(moment_bound(4, 0, &one, &one).unwrap(), one);
        let me = engine();
        let m33 = me
            .moment_at(
                3,
                &[one.clone(), one.clone(), one.clone()],
                &[one.clone(), one.clone()],
            )
            .unwrap();
        assert!(m33.value <= q(25, 1));
        // k = 2 equality: two-hop moments are exactly the Poisson moments
        for n in 1..=4u32 {
            let taus = vec![one.clone(); n as usize];
            let m = me.moment_at(2, &taus, std::slice::from_ref(&one)).unwrap();
            assert_eq!(m.value, moment_bound(2, n, &one, &one).unwrap());
        }
    }

    #[test]
    fn prepare_fills_the_table_and_serializes() {
        let me = std::sync::Arc::new(MomentEngine::new(3, 3));
        let a = std::sync::Arc::clone(&me);
        let b = std::sync::Arc::clone(&me);
        let ta = std::thread::spawn(move || a.prepare(3, 3).unwrap());
        let tb = std::thread::spawn(move || b.prepare(3, 3).unwrap());
        ta.join().unwrap();
        tb.join().unwrap();
        let entry = me.moment(3, &[1, 1, 1]).unwrap();
        assert!(!entry.poly.is_zero());
    }

    #[test]
    fn limits_are_enforced() {
        let me = engine();
        assert!(me.moment(5, &[1]).is_err());
        assert!(me.moment(3, &[5]).is_err());
        assert!(me.moment(3, &[]).is_err());
        assert!(me.moment(3, &[0, 1]).is_err());
        // a larger engine accepts what the small one refuses
        let big = MomentEngine::new(5, 5);
        assert!(big.moment(5, &[1]).is_ok());
    }
}
