//! Ordered variable registry shared by all polynomials of one engine.

use std::cmp::Ordering;
use std::sync::Arc;

/// Handle to a symbol in a [`VarRegistry`]. Cheap to copy; only
/// meaningful together with the registry that issued it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Symbol(pub(crate) usize);

impl Symbol {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Role of a registered symbol.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarRole {
    /// Endpoint offset. Tau symbols are totally ordered, ascending in
    /// declaration order; every pair of taus is comparable.
    Tau,
    /// Per-cell intensity. Positive scalar, no order relation.
    Lambda,
    /// Transient integration variable. Never survives in a result
    /// returned by [`super::box_integral`].
    Bound,
}

/// Ordered list of symbols with roles. Registries are small (a dozen or
/// so symbols at desk scale) and exponent vectors are dense over them.
#[derive(Debug)]
pub struct VarRegistry {
    names: Vec<String>,
    roles: Vec<VarRole>,
}

impl VarRegistry {
    pub fn new() -> Self {
        VarRegistry {
            names: Vec::new(),
            roles: Vec::new(),
        }
    }

    /// Register a symbol. Panics on a duplicate name: registries are
    /// built once, up front, by engine constructors.
    pub fn add(&mut self, name: &str, role: VarRole) -> Symbol {
        assert!(
            !self.names.iter().any(|n| n == name),
            "duplicate symbol name {name}"
        );
        self.names.push(name.to_string());
        self.roles.push(role);
        Symbol(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.0]
    }

    pub fn role(&self, s: Symbol) -> VarRole {
        self.roles[s.0]
    }

    /// Total order on tau symbols (ascending declaration order).
    /// Panics if either symbol is not a tau.
    pub fn tau_cmp(&self, a: Symbol, b: Symbol) -> Ordering {
        assert_eq!(self.role(a), VarRole::Tau, "tau_cmp on non-tau symbol");
        assert_eq!(self.role(b), VarRole::Tau, "tau_cmp on non-tau symbol");
        a.0.cmp(&b.0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len()).map(Symbol)
    }
}

impl Default for VarRegistry {
    fn default() -> Self {
        Self::new()
    }
}

/// The standard symbol layout used by the moment/cumulant engines and the
/// variance closed forms: chamber arguments `tau1..tauN`, transient
/// integration variables `u1..uN`, intensities `lambda1..lambda{K-1}`,
/// plus the merged `tau` and `lambda` used when all arguments coincide.
#[derive(Debug, Clone)]
pub struct EngineVars {
    pub reg: Arc<VarRegistry>,
    /// Single endpoint offset used after equal-argument specialization.
    pub tau: Symbol,
    /// Single intensity used after equal-intensity specialization.
    pub lambda: Symbol,
    /// Chamber argument symbols, ascending: `taus[0] <= taus[1] <= ...`.
    pub taus: Vec<Symbol>,
    /// Integration variables, one per chamber argument.
    pub bounds: Vec<Symbol>,
    /// Per-cell intensities `lambda1..lambda{k_max-1}`.
    pub lambdas: Vec<Symbol>,
}

impl EngineVars {
    pub fn new(k_max: u32, n_max: u32) -> Self {
        // Lambdas are declared first so canonical monomials read
        // intensity-first, the way the closed-form tables are written.
        let mut reg = VarRegistry::new();
        let lambda = reg.add("lambda", VarRole::Lambda);
        let lambdas = (1..k_max.max(2))
            .map(|i| reg.add(&format!("lambda{i}"), VarRole::Lambda))
            .collect();
        let tau = reg.add("tau", VarRole::Tau);
        let taus = (1..=n_max)
            .map(|i| reg.add(&format!("tau{i}"), VarRole::Tau))
            .collect();
        let bounds = (1..=n_max)
            .map(|i| reg.add(&format!("u{i}"), VarRole::Bound))
            .collect();
        EngineVars {
            reg: Arc::new(reg),
            tau,
            lambda,
            taus,
            bounds,
            lambdas,
        }
    }

    pub fn n_max(&self) -> u32 {
        self.taus.len() as u32
    }

    pub fn k_max(&self) -> u32 {
        self.lambdas.len() as u32 + 1
    }
}
