//! Exact-rational simplex workbench for the p-norm pivoting rule.
//!
//! Linear programs are kept in standard form `min cᵀx, Ax = b, x ≥ 0` with
//! arbitrary-precision rational data. The crate provides dictionary algebra,
//! Dantzig / best-improvement / p-norm entering rules, a tracing simplex
//! engine, a brute-force enumeration oracle with the iteration bounds derived
//! from it, and instance generators (Klee–Minty cubes, random nondegenerate
//! LPs, discounted MDPs).

pub mod analysis;
pub mod certified;
pub mod engine;
pub mod experiment;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod pivot;
pub mod rational;

pub use engine::{phase_one, ratio_test, solve, Outcome, SolveTrace};
pub use lp::{Basis, Dictionary, StandardFormLp};
pub use par::Execution;
pub use pivot::{NormOrder, PivotRule};
pub use rational::Rational;
