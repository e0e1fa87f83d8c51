use num_traits::{One, Signed};
use serde::Serialize;

use super::{AnalysisError, BfsCatalog};
use crate::certified::{self, Interval};
use crate::engine::{ratio_test, RatioTest};
use crate::lp::{self, dictionary, Basis, Dictionary, StandardFormLp};
use crate::par::{self, Execution};
use crate::pivot::{self, select_entering, NormOrder, PivotRule, Selection};
use crate::rational::{self, Rational};

/// `q_N = ‖(v_N)_s‖_p / ‖(v_N)_d‖_p` at one feasible nonbasis, where `s` is
/// the p-norm rule's column and `d` is Dantzig's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QEntry {
    pub basis: Basis,
    #[serde(with = "lp::one_based")]
    pub s: usize,
    #[serde(with = "lp::one_based")]
    pub d: usize,
    /// `q_N^e` (`e` = p, or 1 for ∞).
    #[serde(with = "rational::as_string")]
    pub q_pow: Rational,
}

/// An improving, bounded column whose norm left `[norm_lower, norm_upper]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormBoundViolation {
    pub basis: Basis,
    #[serde(with = "lp::one_based")]
    pub column: usize,
    #[serde(with = "rational::as_string")]
    pub norm_pow: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QReport {
    pub order: NormOrder,
    /// `q^e` with `q = min_N q_N` over feasible nonbases that have an
    /// improving column.
    #[serde(with = "rational::as_string")]
    pub q_pow: Rational,
    pub per_nonbasis: Vec<QEntry>,
    /// `(δ/γ)^e / m` for finite p, `δ/γ` for ∞: the e-th power of the
    /// guaranteed lower bound `(δ/γ)·m^{-1/p}` on `q`.
    #[serde(with = "rational::as_string")]
    pub q_lower_pow: Rational,
    /// Bounds on `‖(v_N)_k‖^e` for improving bounded columns:
    /// `1 + (δ/γ)^p ≤ · ≤ 1 + m(γ/δ)^p`, or `1 ≤ · ≤ γ/δ` for ∞.
    #[serde(with = "rational::as_string")]
    pub norm_lower: Rational,
    #[serde(with = "rational::as_string")]
    pub norm_upper: Rational,
    pub columns_checked: usize,
    pub norm_bound_violations: Vec<NormBoundViolation>,
}

impl QReport {
    pub fn satisfies_lower_bound(&self) -> bool {
        self.q_pow >= self.q_lower_pow
    }

    /// Enclosure of `q` itself.
    pub fn q_interval(&self, prec: u32) -> Interval {
        certified::root(&self.q_pow, self.order.exponent(), prec)
    }

    /// Exact text form of `q`: the rational itself, or `(q^p)^(1/p)`.
    pub fn q_display(&self) -> String {
        match self.order.exponent() {
            1 => rational::format(&self.q_pow),
            _ if self.q_pow.is_one() => "1".to_string(),
            e => format!("({})^(1/{e})", rational::format(&self.q_pow)),
        }
    }
}

/// `(s, d, q_N^e)` for one dictionary, with `s`/`d` as nonbasis positions;
/// `None` when no reduced cost is negative.
pub fn nonbasis_q(dict: &Dictionary, order: NormOrder) -> Option<(usize, usize, Rational)> {
    let Selection::Enter(s) = select_entering(dict, PivotRule::PNorm(order), |_| None) else {
        return None;
    };
    let (d, _) = dict.min_reduced_cost()?;
    let q_pow = pivot::column_norm_power(dict, s, order) / pivot::column_norm_power(dict, d, order);
    Some((s, d, q_pow))
}

pub fn compute_q(lp: &StandardFormLp, catalog: &BfsCatalog, order: NormOrder) -> Result<QReport, AnalysisError> {
    compute_q_with(lp, catalog, order, Execution::default())
}

/// Computes `q` and, along the way, checks the norm bounds on every
/// improving column with a bounded ratio test at every feasible basis.
pub fn compute_q_with(
    lp: &StandardFormLp,
    catalog: &BfsCatalog,
    order: NormOrder,
    exec: Execution,
) -> Result<QReport, AnalysisError> {
    let (Some(gamma), Some(delta), true) = (&catalog.gamma, &catalog.delta, catalog.nondegenerate) else {
        return Err(AnalysisError::DegenerateInstance);
    };
    let m = rational::int(lp.m() as i64);
    let ratio_pow = order.raise(&(delta / gamma));
    let (norm_lower, norm_upper, q_lower_pow) = match order {
        NormOrder::Finite(_) => {
            (Rational::one() + &ratio_pow, Rational::one() + &m / &ratio_pow, &ratio_pow / &m)
        }
        NormOrder::Infinity => (Rational::one(), gamma / delta, delta / gamma),
    };

    type PerBasis = (Option<QEntry>, usize, Vec<NormBoundViolation>);
    let per_basis: Vec<Result<PerBasis, AnalysisError>> = par::map(exec, &catalog.entries, |entry| {
        let dict = dictionary(lp, entry.basis())?;
        let mut checked = 0;
        let mut violations = Vec::new();
        for k in (0..dict.ell()).filter(|&k| dict.c_bar()[k].is_negative()) {
            if ratio_test(&dict, k)? == RatioTest::UnboundedRay {
                continue;
            }
            checked += 1;
            let norm_pow = pivot::column_norm_power(&dict, k, order);
            if norm_pow < norm_lower || norm_pow > norm_upper {
                violations.push(NormBoundViolation { basis: entry.basis().clone(), column: dict.nonbasis()[k], norm_pow });
            }
        }
        let q_entry = nonbasis_q(&dict, order).map(|(s, d, q_pow)| QEntry {
            basis: entry.basis().clone(),
            s: dict.nonbasis()[s],
            d: dict.nonbasis()[d],
            q_pow,
        });
        Ok((q_entry, checked, violations))
    });

    let mut per_nonbasis = Vec::new();
    let mut columns_checked = 0;
    let mut norm_bound_violations = Vec::new();
    for item in per_basis {
        let (entry, checked, violations) = item?;
        per_nonbasis.extend(entry);
        columns_checked += checked;
        norm_bound_violations.extend(violations);
    }
    let q_pow = per_nonbasis.iter().map(|e| &e.q_pow).min().cloned().ok_or(AnalysisError::NoImprovingNonbasis)?;
    Ok(QReport {
        order,
        q_pow,
        per_nonbasis,
        q_lower_pow,
        norm_lower,
        norm_upper,
        columns_checked,
        norm_bound_violations,
    })
}
