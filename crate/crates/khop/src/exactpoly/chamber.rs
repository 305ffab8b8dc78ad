//! Polynomials attached to the chamber on which they are valid.

use super::poly::MultiPoly;
use super::registry::{Symbol, VarRole};

/// A polynomial together with the ordered chain of variables
/// `chain[0] <= chain[1] <= ...` on which its representation holds.
/// Symmetric moment and cumulant functions are stored this way: the
/// polynomial is their restriction to the sorted chamber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberPoly {
    pub poly: MultiPoly,
    pub chain: Vec<Symbol>,
}

impl ChamberPoly {
    pub fn new(poly: MultiPoly, chain: Vec<Symbol>) -> Self {
        debug_assert!(
            poly.used_symbols()
                .iter()
                .all(|&(s, role)| role == VarRole::Lambda || chain.contains(&s)),
            "chamber chain must cover every tau/bound variable of the polynomial"
        );
        ChamberPoly { poly, chain }
    }

    /// Substitute a chamber variable by its right neighbor (a chamber
    /// boundary); always legal on the closed chamber.
    pub fn collapse_at(&self, i: usize) -> ChamberPoly {
        assert!(
            i + 1 < self.chain.len(),
            "no right neighbor to collapse onto"
        );
        let poly = self.poly.rename(&[(self.chain[i], self.chain[i + 1])]);
        let mut chain = self.chain.clone();
        chain.remove(i);
        ChamberPoly::new(poly, chain)
    }

    /// Rename every chain variable onto a single symbol (all arguments
    /// equal); the result is an unconditional polynomial in `target`.
    pub fn all_equal(&self, target: Symbol) -> MultiPoly {
        let map: Vec<(Symbol, Symbol)> = self.chain.iter().map(|&s| (s, target)).collect();
        self.poly.rename(&map)
    }
}
