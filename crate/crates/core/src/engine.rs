//! The primal simplex loop over exact dictionaries, with full per-iteration
//! traces, and an auxiliary-problem phase one for finding a starting basis.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::lp::{self, dictionary, BasicSolution, Basis, Dictionary, LpError, StandardFormLp};
use crate::pivot::{self, select_entering, NormOrder, PivotRule, Selection};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("initial basis {0} is not primal feasible")]
    InfeasibleInitialBasis(Basis),
    #[error("column {k} out of range for a dictionary with {ell} nonbasic columns")]
    IndexOutOfRange { k: usize, ell: usize },
    #[error("max_iters must be at least 1")]
    ZeroIterationLimit,
    #[error("problem is infeasible (auxiliary optimum {0})")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatioTest {
    /// `row` is the dictionary row of the leaving variable, `step` is θ.
    Blocked { row: usize, step: Rational },
    UnboundedRay,
}

/// Minimum ratio `θ = min{ b̄_i / ā_ik : ā_ik > 0 }` for column `k`. Ties go
/// to the smallest leaving variable index, i.e. the first row.
pub fn ratio_test(dict: &Dictionary, k: usize) -> Result<RatioTest, EngineError> {
    if k >= dict.ell() {
        return Err(EngineError::IndexOutOfRange { k, ell: dict.ell() });
    }
    let a = dict.a_bar();
    let mut best: Option<(usize, Rational)> = None;
    for i in 0..dict.m() {
        let coef = &a[(i, k)];
        if !coef.is_positive() {
            continue;
        }
        let ratio = &dict.b_bar()[i] / coef;
        if best.as_ref().is_none_or(|(_, r)| ratio < *r) {
            best = Some((i, ratio));
        }
    }
    Ok(match best {
        Some((row, step)) => RatioTest::Blocked { row, step },
        None => RatioTest::UnboundedRay,
    })
}

fn step_of(dict: &Dictionary, k: usize) -> Option<Rational> {
    match ratio_test(dict, k).ok()? {
        RatioTest::Blocked { step, .. } => Some(step),
        RatioTest::UnboundedRay => None,
    }
}

/// One basis exchange. Variable indices are 0-based; they serialize 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub basis_before: Basis,
    #[serde(with = "lp::one_based")]
    pub entering: usize,
    #[serde(with = "lp::one_based")]
    pub leaving: usize,
    /// θ_s
    #[serde(with = "rational::as_string")]
    pub step: Rational,
    /// Δ_s = −c̄_s
    #[serde(with = "rational::as_string")]
    pub delta_s: Rational,
    /// Δ_d = −min_k c̄_k, recorded whatever the rule
    #[serde(with = "rational::as_string")]
    pub delta_d: Rational,
    #[serde(with = "lp::one_based")]
    pub dantzig_entering: usize,
    /// Order of the two recorded norms.
    pub norm_order: NormOrder,
    /// `‖(v_N)_s‖^e` for the entering column (`e` = p, or 1 for ∞).
    #[serde(with = "rational::as_string")]
    pub norm_s: Rational,
    /// `‖(v_N)_d‖^e` for Dantzig's column.
    #[serde(with = "rational::as_string")]
    pub norm_d: Rational,
    #[serde(with = "rational::as_string")]
    pub objective_before: Rational,
    #[serde(with = "rational::as_string")]
    pub objective_after: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Optimal {
        basis: Basis,
    },
    Unbounded {
        #[serde(with = "lp::one_based")]
        entering: usize,
    },
    IterationLimit,
    /// A pivot with θ = 0 was about to happen; the trace stops before it.
    DegeneratePivot {
        #[serde(with = "lp::one_based")]
        entering: usize,
        #[serde(with = "lp::one_based")]
        leaving: usize,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Optimal { .. } => "Optimal",
            Outcome::Unbounded { .. } => "Unbounded",
            Outcome::IterationLimit => "IterationLimit",
            Outcome::DegeneratePivot { .. } => "DegeneratePivot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub rule: PivotRule,
    pub initial_solution: BasicSolution,
    pub records: Vec<IterationRecord>,
    pub outcome: Outcome,
    /// Objective of the last basis visited.
    #[serde(with = "rational::as_string")]
    pub final_objective: Rational,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Bases visited, starting with the initial one.
    pub fn bases(&self) -> Vec<Basis> {
        let mut out = vec![self.initial_solution.basis.clone()];
        for r in &self.records {
            out.push(r.basis_before.exchange(r.leaving, r.entering));
        }
        out
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self.outcome, Outcome::Optimal { .. })
    }
}

/// Default iteration ceiling, `2·C(n, m)`.
pub fn default_max_iters(lp: &StandardFormLp) -> usize {
    let (n, m) = (lp.n() as u128, lp.m() as u128);
    let mut c: u128 = 1;
    for i in 0..m.min(n - m) {
        c = c * (n - i) / (i + 1);
        if c > usize::MAX as u128 / 2 {
            return usize::MAX;
        }
    }
    (2 * c) as usize
}

/// Runs the simplex method from a feasible `initial` basis.
pub fn solve(
    lp: &StandardFormLp,
    initial: &Basis,
    rule: PivotRule,
    max_iters: usize,
) -> Result<SolveTrace, EngineError> {
    if max_iters == 0 {
        return Err(EngineError::ZeroIterationLimit);
    }
    let mut dict = dictionary(lp, initial)?;
    if !dict.is_feasible() {
        return Err(EngineError::InfeasibleInitialBasis(initial.clone()));
    }
    let initial_solution = BasicSolution::from_dictionary(&dict, lp.n());
    let norm_order = rule.trace_norm();
    let mut records = Vec::new();
    let outcome = loop {
        let k = match select_entering(&dict, rule, |k| step_of(&dict, k)) {
            Selection::Optimal => break Outcome::Optimal { basis: dict.basis().clone() },
            Selection::UnboundedRay(k) => break Outcome::Unbounded { entering: dict.nonbasis()[k] },
            Selection::Enter(k) => k,
        };
        if records.len() == max_iters {
            break Outcome::IterationLimit;
        }
        let entering = dict.nonbasis()[k];
        let (row, step) = match ratio_test(&dict, k)? {
            RatioTest::UnboundedRay => break Outcome::Unbounded { entering },
            RatioTest::Blocked { row, step } => (row, step),
        };
        let leaving = dict.basis().indices()[row];
        if step.is_zero() {
            break Outcome::DegeneratePivot { entering, leaving };
        }
        let (d, min_cost) = dict.min_reduced_cost().expect("improving column exists");
        let delta_s = -dict.c_bar()[k].clone();
        let objective_after = dict.z0() - &delta_s * &step;
        let record = IterationRecord {
            t: records.len(),
            basis_before: dict.basis().clone(),
            entering,
            leaving,
            delta_d: -min_cost.clone(),
            dantzig_entering: dict.nonbasis()[d],
            norm_order,
            norm_s: pivot::column_norm_power(&dict, k, norm_order),
            norm_d: pivot::column_norm_power(&dict, d, norm_order),
            objective_before: dict.z0().clone(),
            objective_after,
            step,
            delta_s,
        };
        dict = dictionary(lp, &dict.basis().exchange(leaving, entering))?;
        debug_assert_eq!(dict.z0(), &record.objective_after);
        records.push(record);
    };
    Ok(SolveTrace {
        instance: lp.name().to_string(),
        m: lp.m(),
        n: lp.n(),
        rule,
        initial_solution,
        records,
        final_objective: dict.z0().clone(),
        outcome,
    })
}

/// Finds a feasible basis of `lp`.
///
/// A basis already present as an identity submatrix with `b ≥ 0` is returned
/// as is. Otherwise rows are sign-flipped so `b ≥ 0`, one artificial column
/// per row is appended and their sum is minimized with Dantzig's rule
/// (switching to Bland's rule after the first θ = 0 step so degenerate
/// auxiliary problems terminate). Artificials left at zero level are pivoted
/// out on any nonzero entry of their row.
pub fn phase_one(lp: &StandardFormLp) -> Result<Basis, EngineError> {
    if let Some(basis) = identity_basis(lp) {
        return Ok(basis);
    }
    let (m, n) = (lp.m(), lp.n());
    let mut rows = lp.a().to_rows();
    let mut b = lp.b().to_vec();
    for (row, rhs) in rows.iter_mut().zip(b.iter_mut()) {
        if rhs.is_negative() {
            row.iter_mut().for_each(|v| *v = -v.clone());
            *rhs = -rhs.clone();
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.extend((0..m).map(|r| if r == i { Rational::one() } else { Rational::zero() }));
    }
    let mut c = vec![Rational::zero(); n];
    c.extend(std::iter::repeat_n(Rational::one(), m));
    let aux = StandardFormLp::new(format!("{}-phase1", lp.name()), rows, b, c)?;

    let mut dict = dictionary(&aux, &Basis::from_sorted_unchecked((n..n + m).collect()))?;
    let mut bland = false;
    loop {
        let improving = (0..dict.ell()).filter(|&k| dict.c_bar()[k].is_negative());
        let k = if bland {
            improving.min_by_key(|&k| dict.nonbasis()[k])
        } else {
            dict.min_reduced_cost().filter(|(_, v)| v.is_negative()).map(|(k, _)| k)
        };
        let Some(k) = k else { break };
        let RatioTest::Blocked { row, step } = ratio_test(&dict, k)? else {
            unreachable!("auxiliary objective is bounded below by zero");
        };
        // Bland: leaving variable with smallest index among ratio ties (first row)
        bland |= step.is_zero();
        let entering = dict.nonbasis()[k];
        let leaving = dict.basis().indices()[row];
        dict = dictionary(&aux, &dict.basis().exchange(leaving, entering))?;
    }
    if dict.z0().is_positive() {
        return Err(EngineError::Infeasible(rational::format(dict.z0())));
    }
    // drive remaining zero-level artificials out
    while let Some(row) = dict.basis().indices().iter().position(|&j| j >= n) {
        let artificial = dict.basis().indices()[row];
        let k = (0..dict.ell())
            .find(|&k| dict.nonbasis()[k] < n && !dict.a_bar()[(row, k)].is_zero())
            .expect("rank(A) = m leaves a nonzero original entry in every artificial row");
        let entering = dict.nonbasis()[k];
        dict = dictionary(&aux, &dict.basis().exchange(artificial, entering))?;
    }
    let basis = dict.basis().clone();
    debug_assert!(dictionary(lp, &basis).map(|d| d.is_feasible()).unwrap_or(false));
    Ok(basis)
}

/// Unit columns `e_1..e_m` present in `A` with `b ≥ 0`.
fn identity_basis(lp: &StandardFormLp) -> Option<Basis> {
    if lp.b().iter().any(Signed::is_negative) {
        return None;
    }
    let a: &Matrix = lp.a();
    let m = lp.m();
    let mut chosen = Vec::with_capacity(m);
    for i in 0..m {
        let j = (0..lp.n()).find(|&j| (0..m).all(|r| a[(r, j)] == if r == i { Rational::one() } else { Rational::zero() }))?;
        chosen.push(j);
    }
    chosen.sort_unstable();
    Some(Basis::from_sorted_unchecked(chosen))
}
