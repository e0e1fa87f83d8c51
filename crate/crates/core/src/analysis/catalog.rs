use std::collections::HashMap;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::AnalysisError;
use crate::lp::{dictionary, BasicSolution, Basis, StandardFormLp};
use crate::par::{self, Execution};
use crate::rational::{self, Rational};

/// Default cap on the number of `m`-subsets examined.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 250_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub solution: BasicSolution,
    /// `c̄ ≥ 0` at this basis.
    pub dual_feasible: bool,
    /// Smallest and largest `|c̄_k|` over the negative reduced costs.
    pub negative_cost_range: Option<(Rational, Rational)>,
}

impl CatalogEntry {
    pub fn basis(&self) -> &Basis {
        &self.solution.basis
    }

    pub fn objective(&self) -> &Rational {
        &self.solution.objective
    }
}

/// Every feasible basis of an instance, with the constants derived from
/// them: `γ`/`δ` (largest/smallest positive BFS entry), the optimal and
/// second-best objective values, and the extrema of negative reduced costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsCatalog {
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub subsets_examined: u128,
    /// Feasible bases in lexicographic order.
    pub entries: Vec<CatalogEntry>,
    pub gamma: Option<Rational>,
    pub delta: Option<Rational>,
    pub z_star: Rational,
    pub z_second: Option<Rational>,
    pub gamma_d_prime: Option<Rational>,
    pub delta_d_prime: Option<Rational>,
    pub nondegenerate: bool,
    pub optimal_basis: Basis,
    index: HashMap<Basis, usize>,
}

impl BfsCatalog {
    pub fn feasible_bases(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, basis: &Basis) -> Option<&CatalogEntry> {
        self.index.get(basis).map(|&i| &self.entries[i])
    }

    /// Whether every basic value of every BFS lies in `[lo, hi]`.
    pub fn basic_values_within(&self, lo: &Rational, hi: &Rational) -> bool {
        self.entries.iter().all(|e| e.solution.basic_values().all(|v| lo <= v && v <= hi))
    }

    pub fn summary(&self) -> CatalogSummary {
        CatalogSummary {
            instance: self.instance.clone(),
            m: self.m,
            n: self.n,
            feasible_bases: self.entries.len(),
            gamma: self.gamma.clone(),
            delta: self.delta.clone(),
            z_star: self.z_star.clone(),
            z_second: self.z_second.clone(),
            gamma_d_prime: self.gamma_d_prime.clone(),
            delta_d_prime: self.delta_d_prime.clone(),
            nondegenerate: self.nondegenerate,
            optimal_basis: self.optimal_basis.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogSummary {
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub feasible_bases: usize,
    #[serde(with = "rational::opt_string")]
    pub gamma: Option<Rational>,
    #[serde(with = "rational::opt_string")]
    pub delta: Option<Rational>,
    #[serde(with = "rational::as_string")]
    pub z_star: Rational,
    #[serde(with = "rational::opt_string")]
    pub z_second: Option<Rational>,
    #[serde(with = "rational::opt_string")]
    pub gamma_d_prime: Option<Rational>,
    #[serde(with = "rational::opt_string")]
    pub delta_d_prime: Option<Rational>,
    pub nondegenerate: bool,
    pub optimal_basis: Basis,
}

pub fn enumerate_bfs(lp: &StandardFormLp, budget: u64) -> Result<BfsCatalog, AnalysisError> {
    enumerate_bfs_with(lp, budget, Execution::default())
}

/// Examines all `C(n, m)` column subsets, keeping the nonsingular feasible
/// ones. `z_star` is the minimum over BFS objectives, which is the optimal
/// value only when the problem is bounded.
pub fn enumerate_bfs_with(lp: &StandardFormLp, budget: u64, exec: Execution) -> Result<BfsCatalog, AnalysisError> {
    let (m, n) = (lp.m(), lp.n());
    let required = binomial(n, m);
    if required > budget as u128 {
        return Err(AnalysisError::BudgetExceeded { required, budget });
    }
    let subsets: Vec<Vec<usize>> = (0..n).combinations(m).collect();
    let entries: Vec<CatalogEntry> = par::map(exec, &subsets, |cols| {
        let basis = Basis::from_sorted_unchecked(cols.clone());
        let dict = dictionary(lp, &basis).ok()?;
        if !dict.is_feasible() {
            return None;
        }
        let negatives = dict.c_bar().iter().filter(|v| v.is_negative()).map(Signed::abs);
        let negative_cost_range = negatives.minmax().into_option();
        Some(CatalogEntry {
            solution: BasicSolution::from_dictionary(&dict, n),
            dual_feasible: negative_cost_range.is_none(),
            negative_cost_range,
        })
    })
    .into_iter()
    .flatten()
    .collect();
    if entries.is_empty() {
        return Err(AnalysisError::NoFeasibleBasis);
    }

    let positives = || entries.iter().flat_map(|e| e.solution.x.iter()).filter(|v| v.is_positive());
    let gamma = positives().max().cloned();
    let delta = positives().min().cloned();
    let nondegenerate = entries.iter().all(|e| !e.solution.degenerate);
    let z_star = entries.iter().map(|e| e.objective()).min().unwrap().clone();
    let z_second = entries.iter().map(|e| e.objective()).filter(|&v| *v > z_star).min().cloned();
    let gamma_d_prime = entries.iter().filter_map(|e| e.negative_cost_range.as_ref().map(|r| &r.1)).max().cloned();
    let delta_d_prime = entries.iter().filter_map(|e| e.negative_cost_range.as_ref().map(|r| &r.0)).min().cloned();
    let optimal_basis = entries
        .iter()
        .find(|e| *e.objective() == z_star && e.dual_feasible)
        .or_else(|| entries.iter().find(|e| *e.objective() == z_star))
        .unwrap()
        .basis()
        .clone();
    debug_assert!(gamma.as_ref().is_none_or(|g| !g.is_zero()));
    let index = entries.iter().enumerate().map(|(i, e)| (e.basis().clone(), i)).collect();
    Ok(BfsCatalog {
        instance: lp.name().to_string(),
        m,
        n,
        subsets_examined: required,
        entries,
        gamma,
        delta,
        z_star,
        z_second,
        gamma_d_prime,
        delta_d_prime,
        nondegenerate,
        optimal_basis,
        index,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
