use num_traits::{One, Signed};
use serde::Serialize;

use super::{evaluate_bounds, evaluate_km_bounds, AnalysisError, BfsCatalog, BoundKind, BoundReport, KmBounds, QReport};
use crate::engine::{ratio_test, RatioTest, SolveTrace};
use crate::linalg::dot;
use crate::lp::{dictionary, BasicSolution, DualSolution, StandardFormLp};
use crate::pivot::{self, select_entering, PivotRule, Selection};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Iteration (or iterate) index of the first counterexample.
    pub first_failure: Option<usize>,
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass(name: &str) -> Self {
        Self { name: name.to_string(), passed: true, first_failure: None, detail: None }
    }

    fn fail(name: &str, at: Option<usize>, detail: String) -> Self {
        Self { name: name.to_string(), passed: false, first_failure: at, detail: Some(detail) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub instance: String,
    pub rule: PivotRule,
    pub iterations: usize,
    pub checks: Vec<CheckResult>,
    /// Present for p-norm traces with at least one iteration.
    pub bounds: Option<BoundReport>,
    /// Present for traces with at least one iteration.
    pub km_bounds: Option<KmBounds>,
    pub all_pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: &str, range: impl IntoIterator<Item = usize>, mut ok: impl FnMut(usize) -> Result<(), String>) -> CheckResult {
    for t in range {
        if let Err(detail) = ok(t) {
            return CheckResult::fail(name, Some(t), detail);
        }
    }
    CheckResult::pass(name)
}

fn fmt(v: &Rational) -> String {
    rational::format(v)
}

/// Re-checks an optimal trace against the catalog, iteration by iteration:
/// record consistency, positive steps, exact objective decrease, the p-norm
/// selection inequality, the three per-iteration lemmas, duality identities,
/// oracle agreement, and the iteration bounds that apply to the rule.
///
/// `qrep` is required for p-norm traces and must match the rule's order.
pub fn verify_trace(
    lp: &StandardFormLp,
    trace: &SolveTrace,
    catalog: &BfsCatalog,
    qrep: Option<&QReport>,
    dual_opt: &DualSolution,
) -> Result<VerificationReport, AnalysisError> {
    if trace.instance != catalog.instance || trace.m != catalog.m || trace.n != catalog.n || lp.name() != catalog.instance {
        return Err(AnalysisError::CatalogMismatch(format!(
            "trace `{}` ({}x{}), catalog `{}` ({}x{})",
            trace.instance, trace.m, trace.n, catalog.instance, catalog.m, catalog.n
        )));
    }
    if !trace.is_optimal() {
        return Err(AnalysisError::TraceNotOptimal(trace.outcome.label().to_string()));
    }
    let (Some(gamma), Some(delta), true) = (&catalog.gamma, &catalog.delta, catalog.nondegenerate) else {
        return Err(AnalysisError::DegenerateInstance);
    };
    let order = trace.rule.norm_order();
    let q_pow = match (order, qrep) {
        (None, _) => Rational::one(),
        (Some(o), Some(q)) if q.order == o => q.q_pow.clone(),
        (Some(o), q) => {
            return Err(AnalysisError::UndefinedQ {
                wanted: o.to_string(),
                found: q.map_or("none".to_string(), |q| q.order.to_string()),
            })
        }
    };
    let e = order.map_or(1, |o| o.exponent());

    let bases = trace.bases();
    let xs: Vec<&BasicSolution> = bases
        .iter()
        .map(|b| catalog.get(b).map(|entry| &entry.solution))
        .collect::<Option<_>>()
        .ok_or_else(|| AnalysisError::CatalogMismatch("trace visits a basis that is not a feasible basis".into()))?;
    let records = &trace.records;
    let big_t = records.len();
    let z_star = &catalog.z_star;
    let m = rational::int(lp.m() as i64);
    let m_gamma = &m * gamma;
    let gaps: Vec<Rational> = xs.iter().map(|x| &x.objective - z_star).collect();
    let iterations = 0..big_t;

    let mut checks = vec![
        check("record_consistency", iterations.clone(), |t| record_consistent(lp, trace, t, xs[t + 1])),
        check("positive_steps", iterations.clone(), |t| {
            let step = &records[t].step;
            if step.is_positive() { Ok(()) } else { Err(format!("step {}", fmt(step))) }
        }),
        check("objective_decrease", iterations.clone(), |t| {
            let r = &records[t];
            let decrease = &r.objective_before - &r.objective_after;
            let expected = &r.delta_s * &r.step;
            if decrease == expected {
                Ok(())
            } else {
                Err(format!("decrease {} != delta_s*step {}", fmt(&decrease), fmt(&expected)))
            }
        }),
    ];
    if order.is_some() {
        checks.push(check("selection_inequality", iterations.clone(), |t| {
            let r = &records[t];
            let lhs = rational::pow(&r.delta_s, e) * &r.norm_d;
            let rhs = rational::pow(&r.delta_d, e) * &r.norm_s;
            if lhs >= rhs { Ok(()) } else { Err(format!("{} < {}", fmt(&lhs), fmt(&rhs))) }
        }));
    }
    checks.push(check("lemma1", iterations.clone(), |t| {
        let rhs = &xs[t].objective - &m_gamma * &records[t].delta_d;
        if *z_star >= rhs { Ok(()) } else { Err(format!("z* = {} < {}", fmt(z_star), fmt(&rhs))) }
    }));
    checks.push(check("lemma2", iterations.clone(), |t| {
        // gap_{t+1} ≤ (1 − qδ/(mγ))·gap_t  ⇔  q ≤ (gap_t − gap_{t+1})·mγ/(δ·gap_t)
        let (g, g_next) = (&gaps[t], &gaps[t + 1]);
        if !g.is_positive() {
            return Err(format!("nonpositive gap {} before the last iterate", fmt(g)));
        }
        let r = (g - g_next) * &m_gamma / (delta * g);
        if !r.is_negative() && q_pow <= rational::pow(&r, e) {
            Ok(())
        } else {
            Err(format!("gap {} -> {} with q^e = {}", fmt(g), fmt(g_next), fmt(&q_pow)))
        }
    }));
    let tracked: Vec<usize> = iterations
        .clone()
        .map(|t| {
            let basis = bases[t].indices();
            let weight = |j: usize| &xs[t].x[j] * &dual_opt.s[j];
            *basis.iter().max_by(|&&a, &&b| weight(a).cmp(&weight(b)).then(b.cmp(&a))).expect("m ≥ 1")
        })
        .collect();
    checks.push(check("lemma3_existence", iterations.clone(), |t| {
        let j = tracked[t];
        let best = &xs[t].x[j] * &dual_opt.s[j];
        let need = &gaps[t] / &m;
        if best >= need { Ok(()) } else { Err(format!("max x_j s*_j = {} < {}", fmt(&best), fmt(&need))) }
    }));
    checks.push(check("lemma3_tracking", iterations.clone(), |t| {
        let j = tracked[t];
        for k in t + 1..=big_t {
            let lhs = &xs[k].x[j] * &gaps[t];
            let rhs = &m * &xs[t].x[j] * &gaps[k];
            if lhs > rhs {
                return Err(format!("x_{} at iterate {k} exceeds its bound", j + 1));
            }
        }
        Ok(())
    }));
    let dual_objective = dual_opt.objective(lp);
    checks.push(check("duality_gap_identity", 0..=big_t, |t| {
        let lhs = &xs[t].objective - &dual_objective;
        let rhs = dot(&xs[t].x, &dual_opt.s);
        if lhs == rhs { Ok(()) } else { Err(format!("{} != {}", fmt(&lhs), fmt(&rhs))) }
    }));
    checks.push(check("strong_duality", [big_t], |t| {
        if !dual_opt.is_feasible() {
            Err("dual solution is infeasible".into())
        } else if xs[t].objective != dual_objective {
            Err(format!("primal {} != dual {}", fmt(&xs[t].objective), fmt(&dual_objective)))
        } else {
            Ok(())
        }
    }));
    checks.push(check("oracle", [big_t], |_| {
        if trace.final_objective == *z_star {
            Ok(())
        } else {
            Err(format!("final {} != z* {}", fmt(&trace.final_objective), fmt(z_star)))
        }
    }));

    let (mut bounds, mut km_bounds) = (None, None);
    if big_t > 0 {
        let x0 = &xs[0].objective;
        match order {
            Some(o) => {
                let report = evaluate_bounds(catalog, qrep.expect("checked above"), o, x0)?;
                checks.extend(BoundKind::PNORM.iter().map(|&k| bound_check(k, big_t, report.limit(k))));
                bounds = Some(report);
            }
            None => {
                let km = evaluate_km_bounds(catalog, x0)?;
                checks.extend(BoundKind::DANTZIG.iter().map(|&k| bound_check(k, big_t, km.limit(k).expect("km kind"))));
            }
        }
        km_bounds = Some(evaluate_km_bounds(catalog, x0)?);
    }

    let all_pass = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        instance: trace.instance.clone(),
        rule: trace.rule,
        iterations: big_t,
        checks,
        bounds,
        km_bounds,
        all_pass,
    })
}

fn bound_check(kind: BoundKind, iterations: usize, limit: u64) -> CheckResult {
    if iterations as u64 <= limit {
        CheckResult::pass(kind.name())
    } else {
        CheckResult::fail(kind.name(), None, format!("{iterations} iterations > {limit}"))
    }
}

/// Recomputes the dictionary before iteration `t` and compares it with the
/// recorded values.
fn record_consistent(lp: &StandardFormLp, trace: &SolveTrace, t: usize, next: &BasicSolution) -> Result<(), String> {
    let r = &trace.records[t];
    if r.t != t {
        return Err(format!("record numbered {}", r.t));
    }
    let dict = dictionary(lp, &r.basis_before).map_err(|e| e.to_string())?;
    let position = |j: usize| dict.nonbasis().iter().position(|&v| v == j);
    let k = position(r.entering).ok_or("entering variable is basic")?;
    let step_of = |c| match ratio_test(&dict, c) {
        Ok(RatioTest::Blocked { step, .. }) => Some(step),
        _ => None,
    };
    if select_entering(&dict, trace.rule, step_of) != Selection::Enter(k) {
        return Err(format!("rule {} does not select x_{}", trace.rule, r.entering + 1));
    }
    let Ok(RatioTest::Blocked { row, step }) = ratio_test(&dict, k) else {
        return Err("entering column has no blocking row".into());
    };
    let (d, min_cost) = dict.min_reduced_cost().ok_or("empty nonbasis")?;
    let order = trace.rule.trace_norm();
    let consistent = dict.basis().indices()[row] == r.leaving
        && step == r.step
        && -dict.c_bar()[k].clone() == r.delta_s
        && -min_cost.clone() == r.delta_d
        && dict.nonbasis()[d] == r.dantzig_entering
        && r.norm_order == order
        && pivot::column_norm_power(&dict, k, order) == r.norm_s
        && pivot::column_norm_power(&dict, d, order) == r.norm_d
        && *dict.z0() == r.objective_before
        && next.objective == r.objective_after;
    if consistent { Ok(()) } else { Err("recorded values differ from the recomputed dictionary".into()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{compute_q, enumerate_bfs};
    use crate::engine::solve;
    use crate::lp::tests::two_box;
    use crate::lp::{dual_solution, Basis};
    use crate::pivot::NormOrder;
    use crate::rational::int;

    fn run(rule: PivotRule, start: [usize; 2]) -> VerificationReport {
        let lp = two_box();
        let cat = enumerate_bfs(&lp, 100).unwrap();
        let trace = solve(&lp, &Basis::from_indices(start, 2, 4).unwrap(), rule, 10).unwrap();
        let q = rule.norm_order().map(|o| compute_q(&lp, &cat, o).unwrap());
        let dual = dual_solution(&lp, &cat.optimal_basis).unwrap();
        verify_trace(&lp, &trace, &cat, q.as_ref(), &dual).unwrap()
    }

    #[test]
    fn steepest_edge_trace_passes() {
        let report = run(PivotRule::STEEPEST_EDGE, [2, 3]);
        assert_eq!(report.iterations, 2);
        assert!(report.all_pass, "{:?}", report.failures().collect::<Vec<_>>());
        let bounds = report.bounds.unwrap();
        assert_eq!(bounds.thm3, 2);
        for name in ["lemma1", "lemma2", "lemma3_existence", "lemma3_tracking", "selection_inequality", "thm6"] {
            assert!(report.checks.iter().any(|c| c.name == name), "{name}");
        }
    }

    #[test]
    fn dantzig_and_best_use_km_bounds() {
        for rule in [PivotRule::Dantzig, PivotRule::BestImprovement] {
            let report = run(rule, [2, 3]);
            assert!(report.all_pass);
            assert!(report.bounds.is_none());
            assert!(report.check("km1").is_some() && report.check("km2").is_some());
            assert!(report.check("thm3").is_none());
        }
    }

    #[test]
    fn zero_iterations_pass_vacuously() {
        let report = run(PivotRule::PNorm(NormOrder::Infinity), [0, 1]);
        assert_eq!(report.iterations, 0);
        assert!(report.all_pass);
        assert!(report.bounds.is_none());
    }

    #[test]
    fn tampered_trace_is_caught() {
        let lp = two_box();
        let cat = enumerate_bfs(&lp, 100).unwrap();
        let mut trace = solve(&lp, &Basis::from_indices([2, 3], 2, 4).unwrap(), PivotRule::Dantzig, 10).unwrap();
        trace.records[0].delta_d = int(5);
        let dual = dual_solution(&lp, &cat.optimal_basis).unwrap();
        let report = verify_trace(&lp, &trace, &cat, None, &dual).unwrap();
        assert!(!report.all_pass);
        let failed = report.check("record_consistency").unwrap();
        assert_eq!(failed.first_failure, Some(0));
    }

    #[test]
    fn preconditions() {
        let lp = two_box();
        let cat = enumerate_bfs(&lp, 100).unwrap();
        let trace = solve(&lp, &Basis::from_indices([2, 3], 2, 4).unwrap(), PivotRule::STEEPEST_EDGE, 1).unwrap();
        let dual = dual_solution(&lp, &cat.optimal_basis).unwrap();
        let q = compute_q(&lp, &cat, NormOrder::STEEPEST).unwrap();
        assert!(matches!(verify_trace(&lp, &trace, &cat, Some(&q), &dual), Err(AnalysisError::TraceNotOptimal(_))));
        let other = lp.clone().with_name("other");
        let full = solve(&other, &Basis::from_indices([2, 3], 2, 4).unwrap(), PivotRule::STEEPEST_EDGE, 10).unwrap();
        assert!(matches!(verify_trace(&lp, &full, &cat, Some(&q), &dual), Err(AnalysisError::CatalogMismatch(_))));
        let full = solve(&lp, &Basis::from_indices([2, 3], 2, 4).unwrap(), PivotRule::STEEPEST_EDGE, 10).unwrap();
        assert!(matches!(verify_trace(&lp, &full, &cat, None, &dual), Err(AnalysisError::UndefinedQ { .. })));
    }
}
