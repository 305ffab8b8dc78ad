//! Multivariate polynomials with exact rational coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::{format_rational, Rational};
use super::registry::{Symbol, VarRegistry, VarRole};
use crate::{Error, Result};

type Expo = Vec<u16>;

/// Polynomial over a [`VarRegistry`], stored as a map from dense exponent
/// vectors to nonzero rational coefficients. Two polynomials are equal
/// iff their term maps are equal.
#[derive(Clone)]
pub struct MultiPoly {
    reg: Arc<VarRegistry>,
    terms: BTreeMap<Expo, Rational>,
}

impl MultiPoly {
    pub fn zero(reg: &Arc<VarRegistry>) -> Self {
        MultiPoly {
            reg: Arc::clone(reg),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(reg: &Arc<VarRegistry>, c: Rational) -> Self {
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(vec![0; reg.len()], c);
        }
        p
    }

    pub fn one(reg: &Arc<VarRegistry>) -> Self {
        Self::constant(reg, Rational::one())
    }

    pub fn from_int(reg: &Arc<VarRegistry>, n: i64) -> Self {
        Self::constant(reg, Rational::from_integer(n.into()))
    }

    pub fn var(reg: &Arc<VarRegistry>, s: Symbol) -> Self {
        Self::monomial(reg, Rational::one(), &[(s, 1)])
    }

    pub fn monomial(reg: &Arc<VarRegistry>, coeff: Rational, powers: &[(Symbol, u16)]) -> Self {
        let mut p = Self::zero(reg);
        if coeff.is_zero() {
            return p;
        }
        let mut e = vec![0u16; reg.len()];
        for &(s, k) in powers {
            e[s.index()] += k;
        }
        p.terms.insert(e, coeff);
        p
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&vec![0u16; self.reg.len()])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|e| e[s.index()] > 0)
    }

    pub fn degree_in(&self, s: Symbol) -> u16 {
        self.terms.keys().map(|e| e[s.index()]).max().unwrap_or(0)
    }

    /// Maximum total degree over a set of symbols (all symbols when
    /// `symbols` is empty).
    pub fn total_degree_in(&self, symbols: &[Symbol]) -> u32 {
        self.terms
            .keys()
            .map(|e| {
                if symbols.is_empty() {
                    e.iter().map(|&x| x as u32).sum()
                } else {
                    symbols.iter().map(|s| e[s.index()] as u32).sum()
                }
            })
            .max()
            .unwrap_or(0)
    }

    fn assert_same_registry(&self, other: &MultiPoly) {
        assert!(
            Arc::ptr_eq(&self.reg, &other.reg),
            "polynomials from different registries"
        );
    }

    fn add_term(&mut self, e: Expo, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.assert_same_registry(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.assert_same_registry(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = Self::zero(&self.reg);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.assert_same_registry(other);
        let mut out = Self::zero(&self.reg);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Expo = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.reg);
        }
        let mut out = Self::zero(&self.reg);
        for (e, coeff) in &self.terms {
            out.terms.insert(e.clone(), coeff * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut out = Self::one(&self.reg);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Exact composition: replace `s` by `q` everywhere.
    pub fn substitute(&self, s: Symbol, q: &MultiPoly) -> MultiPoly {
        self.assert_same_registry(q);
        let idx = s.index();
        // Horner in s: group terms by the exponent of s.
        let mut by_power: BTreeMap<u16, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e[idx];
            let mut e2 = e.clone();
            e2[idx] = 0;
            by_power
                .entry(k)
                .or_insert_with(|| Self::zero(&self.reg))
                .add_term(e2, c.clone());
        }
        let mut out = Self::zero(&self.reg);
        let mut prev_pow = 0u16;
        let mut qpow = Self::one(&self.reg);
        for (k, part) in by_power {
            for _ in prev_pow..k {
                qpow = qpow.mul(q);
            }
            prev_pow = k;
            out = out.add(&part.mul(&qpow));
        }
        out
    }

    /// Simultaneous symbol renaming; several sources may map onto one
    /// target, in which case their exponents merge additively.
    pub fn rename(&self, map: &[(Symbol, Symbol)]) -> MultiPoly {
        let mut table: Vec<usize> = (0..self.reg.len()).collect();
        for &(from, to) in map {
            table[from.index()] = to.index();
        }
        let mut out = Self::zero(&self.reg);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u16; e.len()];
            for (i, &k) in e.iter().enumerate() {
                e2[table[i]] += k;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Replace `s` by an exact rational value.
    pub fn substitute_value(&self, s: Symbol, v: &Rational) -> MultiPoly {
        let idx = s.index();
        let mut out = Self::zero(&self.reg);
        for (e, c) in &self.terms {
            let k = e[idx];
            let mut e2 = e.clone();
            e2[idx] = 0;
            let mut coeff = c.clone();
            for _ in 0..k {
                coeff *= v;
            }
            out.add_term(e2, coeff);
        }
        out
    }

    /// Antiderivative of `self` in `v` evaluated between `lo` and `hi`.
    /// The limits must not contain `v`.
    pub fn definite_integral(
        &self,
        v: Symbol,
        lo: &MultiPoly,
        hi: &MultiPoly,
    ) -> Result<MultiPoly> {
        for limit in [lo, hi] {
            if limit.contains(v) {
                return Err(Error::LimitContainsVariable(self.reg.name(v).to_string()));
            }
        }
        let idx = v.index();
        let mut anti = Self::zero(&self.reg);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[idx] += 1;
            let k = Rational::from_integer((e2[idx] as i64).into());
            anti.terms.insert(e2, c / k);
        }
        Ok(anti.substitute(v, hi).sub(&anti.substitute(v, lo)))
    }

    /// Formal partial derivative in `v`.
    pub fn differentiate(&self, v: Symbol) -> MultiPoly {
        let idx = v.index();
        let mut out = Self::zero(&self.reg);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            let k = e2[idx];
            e2[idx] -= 1;
            out.add_term(e2, c * Rational::from_integer((k as i64).into()));
        }
        out
    }

    /// Exact evaluation. Every symbol occurring with a positive exponent
    /// must be assigned.
    pub fn eval(&self, assignment: &HashMap<Symbol, Rational>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v = assignment
                    .get(&Symbol(i))
                    .ok_or_else(|| Error::MissingSymbol(self.reg.name(Symbol(i)).to_string()))?;
                for _ in 0..k {
                    term *= v;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Float evaluation; relative error stays below 1e-12 for the desk
    /// scale degrees (<= 20) this crate works at.
    pub fn eval_f64(&self, assignment: &HashMap<Symbol, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (e, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v = assignment
                    .get(&Symbol(i))
                    .ok_or_else(|| Error::MissingSymbol(self.reg.name(Symbol(i)).to_string()))?;
                term *= v.powi(k as i32);
            }
            total += term;
        }
        Ok(total)
    }

    /// Canonical text form: monomials sorted by total degree, ties broken
    /// lexicographically in registry symbol order (higher power on an
    /// earlier symbol first). Coefficients print as `p/q`, integers as
    /// `p`, unit coefficients are omitted. The zero polynomial is `0`.
    pub fn canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut entries: Vec<(&Expo, &Rational)> = self.terms.iter().collect();
        entries.sort_by(|(ea, _), (eb, _)| {
            let da: u32 = ea.iter().map(|&x| x as u32).sum();
            let db: u32 = eb.iter().map(|&x| x as u32).sum();
            da.cmp(&db).then_with(|| eb.cmp(ea))
        });
        let mut out = String::new();
        for (i, (e, c)) in entries.iter().enumerate() {
            let mag = c.abs();
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.format_monomial(e);
            if mono.is_empty() {
                out.push_str(&format_rational(&mag));
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format_rational(&mag));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }

    fn format_monomial(&self, e: &Expo) -> String {
        let mut parts = Vec::new();
        for (i, &k) in e.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let name = self.reg.name(Symbol(i));
            if k == 1 {
                parts.push(name.to_string());
            } else {
                parts.push(format!("{name}^{k}"));
            }
        }
        parts.join("*")
    }

    /// Symbols occurring with a positive exponent, with their roles.
    pub fn used_symbols(&self) -> Vec<(Symbol, VarRole)> {
        let mut used = vec![false; self.reg.len()];
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    used[i] = true;
                }
            }
        }
        used.iter()
            .enumerate()
            .filter(|(_, &u)| u)
            .map(|(i, _)| (Symbol(i), self.reg.role(Symbol(i))))
            .collect()
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.reg, &other.reg) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self.canonical_string())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}
