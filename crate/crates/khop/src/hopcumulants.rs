//! Joint cumulants of k-hop counts: direct recursion, power reduction,
//! bound, and the shape statistics derived from them.
//!
//! The memo stores `kappa(count(v_1)^{n_1}, ..., count(v_p)^{n_p})` per
//! `(k, mults)` on the chamber `v_1 <= ... <= v_p`. The recursion steps
//! from `k` to `k+1` exactly like the moment recursion, except the
//! integrand is a cumulant of powers; powers are reduced eagerly through
//! the product rule
//! `kappa(X_1,..,X_n Y) = kappa(X_1,..,X_n,Y) + sum kappa(A,X_n) kappa(B,Y)`
//! (A, B running over two-block splits of the remaining arguments), so
//! the recursion only ever touches canonical flat entries.
//!
//! A second, slower route recovers the same polynomials by Moebius
//! inversion of the moment table; it ships for cross-validation and is
//! what `cumulant_from_moments` exposes.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactpoly::{
    box_integral, BoxBlock, ChamberPoly, EngineVars, MultiPoly, Rational, Symbol,
};
use crate::hopmoments::MomentEngine;
use crate::partitions::{bell, moments_to_cumulants, set_partitions};
use crate::{Error, Result};

/// Exact square-root-free skewness: the pair `(c3^2, c2^3)` plus the
/// signed float `c3 / c2^(3/2)`.
#[derive(Clone, Debug)]
pub struct Skewness {
    pub c3: Rational,
    pub c2: Rational,
    pub c3_squared: Rational,
    pub c2_cubed: Rational,
    pub value: f64,
}

/// Exact excess kurtosis `c4 / c2^2` plus its float value.
#[derive(Clone, Debug)]
pub struct ExcessKurtosis {
    pub exact: Rational,
    pub value: f64,
}

/// A cumulant argument slot: chamber variable index and the power the
/// count carries there.
type Slot = (usize, u32);

pub struct CumulantEngine {
    moments: MomentEngine,
    flat: Mutex<HashMap<(u32, u32), ChamberPoly>>,
    power: Mutex<HashMap<(u32, Vec<Slot>), MultiPoly>>,
    prepare_lock: Mutex<()>,
}

impl CumulantEngine {
    pub fn new(k_max: u32, n_max: u32) -> Self {
        CumulantEngine {
            moments: MomentEngine::new(k_max, n_max),
            flat: Mutex::new(HashMap::new()),
            power: Mutex::new(HashMap::new()),
            prepare_lock: Mutex::new(()),
        }
    }

    pub fn vars(&self) -> &EngineVars {
        self.moments.vars()
    }

    /// The moment engine sharing this engine's registry (used by the
    /// inversion route and by callers needing both tables).
    pub fn moments(&self) -> &MomentEngine {
        &self.moments
    }

    pub fn k_max(&self) -> u32 {
        self.vars().k_max()
    }

    pub fn n_max(&self) -> u32 {
        self.vars().n_max()
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

    /// Fill the memo up to the given bounds; serializes with other
    /// prepare calls, after which reads are lock-cheap and immutable.
    pub fn prepare(&self, k: u32, n: u32) -> Result<()> {
        let _guard = self.prepare_lock.lock().unwrap();
        for nn in 1..=n {
            for kk in 1..=k {
                self.flat(kk, nn)?;
            }
        }
        Ok(())
    }

    /// Joint cumulant `kappa(count(v_1)^{n_1}, ..., count(v_p)^{n_p})`
    /// on the chamber `v_1 <= ... <= v_p`. With all multiplicities one
    /// this is the plain joint cumulant; a single argument of power one
    /// is the mean.
    pub fn cumulant(&self, k: u32, mults: &[u32]) -> Result<ChamberPoly> {
        if mults.is_empty() || mults.contains(&0) {
            return Err(Error::InvalidConfig(
                "multiplicity vector must be nonempty with entries >= 1".into(),
            ));
        }
        let n: u32 = mults.iter().sum();
        self.check_limits(k, n)?;
        let slots: Vec<Slot> = mults.iter().enumerate().map(|(i, &m)| (i, m)).collect();
        let poly = self.power_cumulant(k, &slots)?;
        Ok(ChamberPoly::new(
            poly,
            self.vars().taus[..mults.len()].to_vec(),
        ))
    }

    /// All arguments coincident: polynomial in `tau` and the lambdas.
    pub fn cumulant_equal(&self, k: u32, n: u32) -> Result<MultiPoly> {
        Ok(self
            .cumulant(k, &vec![1; n as usize])?
            .all_equal(self.vars().tau))
    }

    /// Order-n cumulant at equal offsets `tau` and equal intensities
    /// `lambda`, exactly.
    pub fn cumulant_at_equal(
        &self,
        k: u32,
        n: u32,
        lambda: &Rational,
        tau: &Rational,
    ) -> Result<Rational> {
        let poly = self.cumulant_equal(k, n)?;
        let mut assignment = HashMap::new();
        assignment.insert(self.vars().tau, tau.clone());
        for i in 0..(k.max(2) - 1) as usize {
            assignment.insert(self.vars().lambdas[i], lambda.clone());
        }
        poly.eval(&assignment)
    }

    /// Flat joint cumulant of `n` distinct arguments.
    fn flat(&self, k: u32, n: u32) -> Result<ChamberPoly> {
        self.check_limits(k, n)?;
        if let Some(hit) = self.flat.lock().unwrap().get(&(k, n)) {
            return Ok(hit.clone());
        }
        let reg = &self.vars().reg;
        let chain: Vec<Symbol> = self.vars().taus[..n as usize].to_vec();
        let entry = if k == 1 {
            // one hop: the count is the constant 1, whose only nonzero
            // cumulant is the first
            let poly = if n == 1 {
                MultiPoly::one(reg)
            } else {
                MultiPoly::zero(reg)
            };
            ChamberPoly::new(poly, chain)
        } else {
            let mut acc = MultiPoly::zero(reg);
            let lambda_new = self.vars().lambdas[(k - 2) as usize];
            for part in set_partitions(n as usize)? {
                let blocks = part.blocks();
                let l = blocks.len();
                let boxes: Vec<BoxBlock> = blocks
                    .iter()
                    .map(|b| BoxBlock {
                        multiplicity: b.len() as u32,
                        cap: self.vars().taus[b[0]],
                    })
                    .collect();
                // Materialize everything the closure will need so it
                // stays infallible: power cumulants for every chamber
                // ordering of the block powers.
                let mut by_order: HashMap<Vec<u32>, MultiPoly> = HashMap::new();
                let mut order: Vec<usize> = (0..l).collect();
                loop {
                    let mults: Vec<u32> = order.iter().map(|&bi| blocks[bi].len() as u32).collect();
                    if let std::collections::hash_map::Entry::Vacant(slot) =
                        by_order.entry(mults.clone())
                    {
                        let slots: Vec<Slot> =
                            mults.iter().enumerate().map(|(i, &m)| (i, m)).collect();
                        slot.insert(self.power_cumulant(k - 1, &slots)?);
                    }
                    if !next_permutation(&mut order) {
                        break;
                    }
                }
                let mut evaluator = |sigma: &[usize]| {
                    let mults: Vec<u32> = sigma.iter().map(|&bi| blocks[bi].len() as u32).collect();
                    let map: Vec<(Symbol, Symbol)> = (0..l)
                        .map(|i| (self.vars().taus[i], self.vars().bounds[sigma[i]]))
                        .collect();
                    by_order[&mults].rename(&map)
                };
                let integral = box_integral(reg, &boxes, &self.vars().bounds[..l], &mut evaluator)?;
                let weighted = integral.mul(&MultiPoly::monomial(
                    reg,
                    Rational::one(),
                    &[(lambda_new, l as u16)],
                ));
                acc = acc.add(&weighted);
            }
            ChamberPoly::new(acc, chain)
        };
        self.flat.lock().unwrap().insert((k, n), entry.clone());
        Ok(entry)
    }

    /// Cumulant of powers, reduced eagerly to flat entries. Slots are
    /// `(chamber variable index, power)` pairs; repeated variable
    /// indices across slots are allowed (they arise during reduction).
    fn power_cumulant(&self, k: u32, slots: &[Slot]) -> Result<MultiPoly> {
        let mut canonical = slots.to_vec();
        canonical.sort_unstable();
        let key = (k, canonical.clone());
        if let Some(hit) = self.power.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let out = if let Some(j) = canonical.iter().position(|&(_, m)| m >= 2) {
            // split count(v)^m into count(v)^{m-1} * count(v)
            let (v, m) = canonical[j];
            let mut rest = canonical.clone();
            rest.remove(j);
            let a: Slot = (v, m - 1);
            let b: Slot = (v, 1);
            let mut flattened = rest.clone();
            flattened.push(a);
            flattened.push(b);
            let mut acc = self.power_cumulant(k, &flattened)?;
            for mask in 0..(1u32 << rest.len()) {
                let mut left = vec![a];
                let mut right = vec![b];
                for (i, slot) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        left.push(*slot);
                    } else {
                        right.push(*slot);
                    }
                }
                let product = self
                    .power_cumulant(k, &left)?
                    .mul(&self.power_cumulant(k, &right)?);
                acc = acc.add(&product);
            }
            acc
        } else {
            // flat: sort the argument multiset ascending and substitute
            // into the distinct-argument entry
            let n = canonical.len() as u32;
            let flat = self.flat(k, n)?;
            let map: Vec<(Symbol, Symbol)> = canonical
                .iter()
                .enumerate()
                .map(|(t, &(v, _))| (self.vars().taus[t], self.vars().taus[v]))
                .collect();
            flat.poly.rename(&map)
        };
        self.power.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Alternate computation path: invert the moment table on the
    /// partition lattice. Must agree with [`Self::cumulant`]; kept as a
    /// built-in cross-validation of two independent code paths.
    pub fn cumulant_from_moments(&self, k: u32, n: u32) -> Result<ChamberPoly> {
        self.check_limits(k, n)?;
        let mut failure: Option<Error> = None;
        let poly = moments_to_cumulants(
            &mut |subset: &[usize]| {
                let m = subset.len() as u32;
                match self.moments.moment(k, &vec![1; m as usize]) {
                    Ok(entry) => {
                        let map: Vec<(Symbol, Symbol)> = subset
                            .iter()
                            .enumerate()
                            .map(|(t, &i)| (self.vars().taus[t], self.vars().taus[i]))
                            .collect();
                        entry.poly.rename(&map)
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        MultiPoly::zero(&self.vars().reg)
                    }
                }
            },
            n as usize,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(ChamberPoly::new(
            poly,
            self.vars().taus[..n as usize].to_vec(),
        ))
    }

    /// Skewness `c3 / c2^(3/2)` at equal offsets and intensities,
    /// square-root free.
    pub fn skewness(&self, k: u32, lambda: &Rational, tau: &Rational) -> Result<Skewness> {
        let c2 = self.cumulant_at_equal(k, 2, lambda, tau)?;
        if c2.is_zero() {
            return Err(Error::ZeroVariance);
        }
        let c3 = self.cumulant_at_equal(k, 3, lambda, tau)?;
        let c3_squared = &c3 * &c3;
        let c2_cubed = &c2 * &c2 * &c2;
        let ratio = (&c3_squared / &c2_cubed).to_f64().unwrap_or(f64::NAN);
        let value = ratio.sqrt() * if c3.is_negative() { -1.0 } else { 1.0 };
        Ok(Skewness {
            c3,
            c2,
            c3_squared,
            c2_cubed,
            value,
        })
    }

    /// Excess kurtosis `c4 / c2^2` at equal offsets and intensities.
    pub fn excess_kurtosis(
        &self,
        k: u32,
        lambda: &Rational,
        tau: &Rational,
    ) -> Result<ExcessKurtosis> {
        let c2 = self.cumulant_at_equal(k, 2, lambda, tau)?;
        if c2.is_zero() {
            return Err(Error::ZeroVariance);
        }
        let c4 = self.cumulant_at_equal(k, 4, lambda, tau)?;
        let exact = &c4 / (&c2 * &c2);
        let value = exact.to_f64().unwrap_or(f64::NAN);
        Ok(ExcessKurtosis { value, exact })
    }
}

/// Upper bound `(2(lambda+1) tau)^(1+(k-2)n) * Bell(n)^(k-2)` on the
/// order-n cumulant at equal offsets below `tau`.
pub fn cumulant_bound(k: u32, n: u32, lambda: &Rational, tau: &Rational) -> Result<Rational> {
    if k < 2 {
        return Err(Error::OutOfRange {
            what: "cumulant_bound",
            detail: "k >= 2".into(),
        });
    }
    if lambda.is_negative() || tau.is_negative() {
        return Err(Error::NegativeArgument("cumulant_bound".into()));
    }
    let base = (lambda + Rational::one()) * tau * Rational::from_integer(2.into());
    let exponent = 1 + (k - 2) * n;
    let mut out = Rational::one();
    for _ in 0..exponent {
        out *= &base;
    }
    let b = bell(n as usize)?;
    for _ in 0..(k - 2) {
        out *= Rational::from_integer(b.into());
    }
    Ok(out)
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
