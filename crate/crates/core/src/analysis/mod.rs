//! Brute-force oracle and bound machinery: exhaustive BFS enumeration, the
//! norm ratio `q`, closed-form iteration bounds and post-hoc trace checks.

mod bounds;
mod catalog;
mod q;
mod verify;

pub use bounds::{evaluate_bounds, evaluate_km_bounds, BoundInputs, BoundKind, BoundReport, KmBounds};
pub use catalog::{enumerate_bfs, enumerate_bfs_with, BfsCatalog, CatalogEntry, CatalogSummary, DEFAULT_ENUMERATION_BUDGET};
pub use q::{compute_q, compute_q_with, nonbasis_q, NormBoundViolation, QEntry, QReport};
pub use verify::{verify_trace, CheckResult, VerificationReport};

use thiserror::Error;

use crate::certified::CertifyError;
use crate::engine::EngineError;
use crate::lp::LpError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("enumeration needs {required} subsets, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("no feasible basis exists")]
    NoFeasibleBasis,
    #[error("instance is degenerate (some BFS has a zero basic value)")]
    DegenerateInstance,
    #[error("every feasible basis is optimal, q is undefined")]
    NoImprovingNonbasis,
    #[error("only one BFS objective value exists, the second-best value is undefined")]
    MissingSecondBest,
    #[error("q report is for p = {found}, bounds requested for p = {wanted}")]
    UndefinedQ { wanted: String, found: String },
    #[error("initial objective {0} is already optimal")]
    InitialOptimal(String),
    #[error("trace outcome is {0}, not Optimal")]
    TraceNotOptimal(String),
    #[error("trace does not belong to this instance: {0}")]
    CatalogMismatch(String),
    #[error("bound value does not fit in 64 bits")]
    Overflow,
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
