//! Exact rational arithmetic and multivariate polynomial algebra.
//!
//! Everything in front of the Monte Carlo harness computes with
//! arbitrary-precision rationals; no floating point enters the symbolic
//! path. The centerpiece is [`box_integral`], which integrates a
//! chamber-wise polynomial integrand over a box whose edges are capped by
//! ordered endpoint symbols. Both recursion engines reduce to it.

mod boxint;
mod chamber;
mod poly;
mod rational;
mod registry;

pub use boxint::{box_integral, BoxBlock};
pub use chamber::ChamberPoly;
pub use poly::MultiPoly;
pub use rational::{format_rational, parse_rational, rational_to_f64, Rational};
pub use registry::{EngineVars, Symbol, VarRegistry, VarRole};
