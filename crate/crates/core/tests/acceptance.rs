//! Acceptance suite: ten criteria, one `PASS`/`FAIL` line each. Runs as a
//! plain binary (`harness = false`) so the summary is always printed; exits
//! nonzero if any criterion fails.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::thread;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use pnorm_simplex::analysis::{
    compute_q, enumerate_bfs, evaluate_bounds, evaluate_km_bounds, verify_trace, BfsCatalog, BoundKind, QReport,
    VerificationReport, DEFAULT_ENUMERATION_BUDGET,
};
use pnorm_simplex::engine::{default_max_iters, solve, SolveTrace};
use pnorm_simplex::experiment::{run_experiment_with, ExperimentConfig};
use pnorm_simplex::generators::{dmdp_generate, dmdp_limit, klee_minty, random_lp, GeneratedLp};
use pnorm_simplex::lp::{dictionary, dual_solution, DualSolution};
use pnorm_simplex::pivot::{select_entering, Selection};
use pnorm_simplex::{Execution, NormOrder, PivotRule, StandardFormLp};

type Q = BigRational;

const CORPUS_SIZE: usize = 120;
const ORDERS: [NormOrder; 4] = [NormOrder::Finite(1), NormOrder::Finite(2), NormOrder::Finite(3), NormOrder::Infinity];

fn int(v: i64) -> Q {
    Q::from_integer(v.into())
}

fn pow(v: &Q, e: u32) -> Q {
    num_traits::pow(v.clone(), e as usize)
}

/// Outcome of one criterion: a verdict and a one-line summary.
struct Verdict {
    pass: bool,
    summary: String,
    problems: Vec<String>,
}

impl Verdict {
    fn new(summary: String, problems: Vec<String>) -> Self {
        Self { pass: problems.is_empty(), summary, problems }
    }
}

// ---------------------------------------------------------------------------
// independent oracles

/// Steepest-edge selection computed from scratch: for every nonbasic `k`,
/// solve `A_B d_B = −A_k` by fresh elimination, take the edge `d` with
/// `d_k = 1`, and maximize `(cᵀd)² / ‖d‖²` over edges with `cᵀd < 0`.
/// Ties go to the smallest variable index. Returns a variable index.
fn steepest_edge_oracle(lp: &StandardFormLp, basis: &[usize]) -> Option<usize> {
    let (m, n) = (lp.m(), lp.n());
    let a = lp.a();
    let mut best: Option<(usize, Q)> = None;
    for k in (0..n).filter(|k| !basis.contains(k)) {
        // augmented [A_B | −A_k]
        let mut rows: Vec<Vec<Q>> =
            (0..m).map(|i| basis.iter().map(|&j| a[(i, j)].clone()).chain([-a[(i, k)].clone()]).collect()).collect();
        for col in 0..m {
            let pivot = (col..m).find(|&r| !rows[r][col].is_zero()).expect("nonsingular basis");
            rows.swap(col, pivot);
            let lead = rows[col][col].clone();
            for v in rows[col].iter_mut() {
                *v /= &lead;
            }
            for r in 0..m {
                if r != col && !rows[r][col].is_zero() {
                    let f = rows[r][col].clone();
                    for c in 0..=m {
                        let delta = &f * &rows[col][c];
                        rows[r][c] -= delta;
                    }
                }
            }
        }
        let mut d = vec![Q::zero(); n];
        d[k] = Q::one();
        for (i, &j) in basis.iter().enumerate() {
            d[j] = rows[i][m].clone();
        }
        let slope: Q = lp.c().iter().zip(&d).map(|(c, v)| c * v).sum();
        if !slope.is_negative() {
            continue;
        }
        let length_sq: Q = d.iter().map(|v| v * v).sum();
        let score = &slope * &slope / length_sq;
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| k)
}

fn objective(lp: &StandardFormLp, x: &[Q]) -> Q {
    lp.c().iter().zip(x).map(|(c, v)| c * v).sum()
}

// ---------------------------------------------------------------------------
// the random corpus

struct Solved {
    rule: PivotRule,
    trace: SolveTrace,
    report: Option<VerificationReport>,
    error: Option<String>,
}

struct CorpusItem {
    lp: StandardFormLp,
    catalog: BfsCatalog,
    qreports: Vec<QReport>,
    dual: DualSolution,
    solved: Vec<Solved>,
}

fn corpus_shapes() -> Vec<(usize, usize)> {
    (2..=5).flat_map(|m| (m + 2..=10).map(move |n| (m, n))).collect()
}

fn rules() -> Vec<PivotRule> {
    let mut r = vec![PivotRule::Dantzig, PivotRule::BestImprovement];
    r.extend(ORDERS.map(PivotRule::PNorm));
    r
}

fn build_item(generated: GeneratedLp) -> Result<CorpusItem, String> {
    let lp = generated.lp;
    let catalog = enumerate_bfs(&lp, DEFAULT_ENUMERATION_BUDGET).map_err(|e| e.to_string())?;
    let qreports = ORDERS.iter().map(|&o| compute_q(&lp, &catalog, o)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let dual = dual_solution(&lp, &catalog.optimal_basis).map_err(|e| e.to_string())?;
    let mut solved = Vec::new();
    for rule in rules() {
        let trace = solve(&lp, &generated.initial_basis, rule, default_max_iters(&lp)).map_err(|e| e.to_string())?;
        let q = rule.norm_order().map(|o| &qreports[ORDERS.iter().position(|&x| x == o).unwrap()]);
        let (report, error) = match verify_trace(&lp, &trace, &catalog, q, &dual) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        solved.push(Solved { rule, trace, report, error });
    }
    Ok(CorpusItem { lp, catalog, qreports, dual, solved })
}

fn in_parallel<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism().map_or(4, |n| n.get()).max(1);
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    let len = slots.len();
    let chunk = len.div_ceil(workers).max(1);
    let mut out: Vec<Option<R>> = (0..len).map(|_| None).collect();
    thread::scope(|s| {
        for (inputs, outputs) in slots.chunks_mut(chunk).zip(out.chunks_mut(chunk)) {
            let f = &f;
            s.spawn(move || {
                for (i, o) in inputs.iter_mut().zip(outputs.iter_mut()) {
                    *o = Some(f(i.take().unwrap()));
                }
            });
        }
    });
    out.into_iter().map(Option::unwrap).collect()
}

fn build_corpus() -> Result<Vec<CorpusItem>, String> {
    let shapes = corpus_shapes();
    let jobs: Vec<(usize, usize, u64)> =
        (0..CORPUS_SIZE).map(|i| (shapes[i % shapes.len()].0, shapes[i % shapes.len()].1, i as u64 + 1)).collect();
    in_parallel(jobs, |(m, n, seed)| {
        let generated = random_lp(m, n, seed, 9).map_err(|e| format!("random_lp({m}, {n}, {seed}): {e}"))?;
        build_item(generated)
    })
    .into_iter()
    .collect()
}

// ---------------------------------------------------------------------------
// criteria

fn pnorm_bound_problems(item: &CorpusItem, s: &Solved, order: NormOrder, raw_zero: &mut usize) -> Vec<String> {
    let mut problems = Vec::new();
    let t = s.trace.iterations() as u64;
    if t == 0 {
        return problems;
    }
    let q = &item.qreports[ORDERS.iter().position(|&x| x == order).unwrap()];
    match evaluate_bounds(&item.catalog, q, order, &item.catalog.get(&s.trace.initial_solution.basis).unwrap().solution.objective) {
        Ok(b) => {
            for kind in BoundKind::PNORM {
                if b.value(kind) < t {
                    *raw_zero += 1;
                }
                if t > b.limit(kind) {
                    problems.push(format!("{} {}: {t} > {} {}", item.lp.name(), s.rule, kind.name(), b.limit(kind)));
                }
            }
        }
        Err(e) => problems.push(format!("{} {}: {e}", item.lp.name(), s.rule)),
    }
    problems
}

fn criterion1(corpus: &[CorpusItem]) -> Verdict {
    let (mut traces, mut comparisons, mut below_raw) = (0, 0, 0);
    let mut problems = Vec::new();
    for item in corpus {
        for s in &item.solved {
            let Some(order) = s.rule.norm_order() else { continue };
            traces += 1;
            if !s.trace.is_optimal() {
                problems.push(format!("{} {}: outcome {}", item.lp.name(), s.rule, s.trace.outcome.label()));
                continue;
            }
            comparisons += 4;
            problems.extend(pnorm_bound_problems(item, s, order, &mut below_raw));
        }
    }
    let note = if below_raw > 0 { format!(", {below_raw} via the unit-limit rule for a vanishing logarithm") } else { String::new() };
    Verdict::new(format!("{traces} p-norm traces on {} instances, {comparisons} bound comparisons{note}", corpus.len()), problems)
}

/// L1, L2, L3 recomputed from trace data and the catalog, plus the
/// verifier's own verdicts for the same checks.
fn criterion2(corpus: &[CorpusItem]) -> Verdict {
    let mut problems = Vec::new();
    let mut iterations = 0usize;
    for item in corpus {
        let cat = &item.catalog;
        let (gamma, delta) = (cat.gamma.clone().unwrap(), cat.delta.clone().unwrap());
        let m = int(item.lp.m() as i64);
        for s in item.solved.iter().filter(|s| s.rule.norm_order().is_some()) {
            let order = s.rule.norm_order().unwrap();
            let e = order.exponent();
            let q_pow = &item.qreports[ORDERS.iter().position(|&x| x == order).unwrap()].q_pow;
            let name = format!("{} {}", item.lp.name(), s.rule);
            match &s.report {
                Some(r) => {
                    for c in r.checks.iter().filter(|c| c.name.starts_with("lemma") && !c.passed) {
                        problems.push(format!("{name}: verifier {} failed at {:?}", c.name, c.first_failure));
                    }
                }
                None => problems.push(format!("{name}: {}", s.error.as_deref().unwrap_or("no report"))),
            }
            let xs: Vec<Vec<Q>> = s.trace.bases().iter().map(|b| cat.get(b).unwrap().solution.x.clone()).collect();
            let gaps: Vec<Q> = xs.iter().map(|x| objective(&item.lp, x) - &cat.z_star).collect();
            for (t, rec) in s.trace.records.iter().enumerate() {
                iterations += 1;
                // L1: z* ≥ cᵀxᵗ − mγΔ_d
                if cat.z_star < objective(&item.lp, &xs[t]) - &m * &gamma * &rec.delta_d {
                    problems.push(format!("{name}: L1 at t={t}"));
                }
                // L2 in the form (gap_t − gap_{t+1})·mγ ≥ q·δ·gap_t, raised to e
                let lhs = (&gaps[t] - &gaps[t + 1]) * &m * &gamma;
                let rhs_base = &delta * &gaps[t];
                if lhs.is_negative() || pow(&lhs, e) < q_pow * pow(&rhs_base, e) {
                    problems.push(format!("{name}: L2 at t={t}"));
                }
                // L3: some basic j has x_j s*_j ≥ gap_t/m, and it stays bounded afterwards
                let basis = s.trace.bases()[t].clone();
                let weight = |j: usize| &xs[t][j] * &item.dual.s[j];
                let jbar = basis.indices().iter().copied().fold(None::<usize>, |acc, j| match acc {
                    Some(a) if weight(a) >= weight(j) => Some(a),
                    _ => Some(j),
                });
                let jbar = jbar.unwrap();
                if weight(jbar) * &m < gaps[t] {
                    problems.push(format!("{name}: L3 existence at t={t}"));
                }
                for k in t + 1..xs.len() {
                    if &xs[k][jbar] * &gaps[t] > &m * &xs[t][jbar] * &gaps[k] {
                        problems.push(format!("{name}: L3 tracking t={t}, k={k}"));
                    }
                }
            }
        }
    }
    Verdict::new(format!("{iterations} p-norm iterations checked for L1, L2, L3"), problems)
}

fn criterion3(corpus: &[CorpusItem]) -> Verdict {
    let mut problems = Vec::new();
    let mut columns = 0;
    for item in corpus {
        let cat = &item.catalog;
        let ratio = cat.delta.clone().unwrap() / cat.gamma.clone().unwrap();
        let m = int(item.lp.m() as i64);
        for q in &item.qreports {
            columns += q.columns_checked;
            let (lower_pow, norm_lo, norm_hi) = match q.order {
                NormOrder::Finite(p) => (pow(&ratio, p) / &m, Q::one() + pow(&ratio, p), Q::one() + &m / pow(&ratio, p)),
                NormOrder::Infinity => (ratio.clone(), Q::one(), ratio.recip()),
            };
            if q.q_pow < lower_pow {
                problems.push(format!("{} p={}: q^p = {} below {}", item.lp.name(), q.order, q.q_pow, lower_pow));
            }
            if q.q_lower_pow != lower_pow || q.norm_lower != norm_lo || q.norm_upper != norm_hi {
                problems.push(format!("{} p={}: reported bounds differ from recomputation", item.lp.name(), q.order));
            }
            for v in &q.norm_bound_violations {
                problems.push(format!("{} p={}: column x{} at {} has norm^p {}", item.lp.name(), q.order, v.column + 1, v.basis, v.norm_pow));
            }
        }
    }
    Verdict::new(format!("{} q reports, {columns} improving bounded columns", corpus.len() * ORDERS.len()), problems)
}

fn criterion4(corpus: &[CorpusItem]) -> Verdict {
    let mut problems = Vec::new();
    let mut dictionaries = 0;
    for item in corpus {
        for s in &item.solved {
            for basis in s.trace.bases() {
                dictionaries += 1;
                let dict = dictionary(&item.lp, &basis).unwrap();
                let library = match select_entering(&dict, PivotRule::STEEPEST_EDGE, |_| None) {
                    Selection::Enter(k) => Some(dict.nonbasis()[k]),
                    _ => None,
                };
                if library != steepest_edge_oracle(&item.lp, basis.indices()) {
                    problems.push(format!("{} at {basis}", item.lp.name()));
                }
            }
        }
    }
    Verdict::new(format!("{dictionaries} dictionaries compared"), problems)
}

fn criterion5(corpus: &[CorpusItem], km: &[(GeneratedLp, BfsCatalog)]) -> Verdict {
    let mut problems = Vec::new();
    let mut solves = 0;
    for item in corpus {
        let min = item.catalog.entries.iter().map(|e| e.solution.objective.clone()).min().unwrap();
        for s in &item.solved {
            solves += 1;
            if !s.trace.is_optimal() || s.trace.final_objective != min {
                problems.push(format!("{} {}: {} vs {min}", item.lp.name(), s.rule, s.trace.final_objective));
            }
        }
    }
    for (g, cat) in km {
        let min = cat.entries.iter().map(|e| e.solution.objective.clone()).min().unwrap();
        for rule in [PivotRule::Dantzig, PivotRule::STEEPEST_EDGE] {
            solves += 1;
            let trace = solve(&g.lp, &g.initial_basis, rule, default_max_iters(&g.lp)).unwrap();
            if trace.final_objective != min {
                problems.push(format!("{} {rule}", g.lp.name()));
            }
        }
    }
    Verdict::new(format!("{solves} optimal objectives equal the enumerated minimum"), problems)
}

fn criterion6(km: &[(GeneratedLp, BfsCatalog)]) -> Verdict {
    let mut problems = Vec::new();
    let mut counts = Vec::new();
    for (g, cat) in km {
        let m = g.lp.m();
        let dantzig = solve(&g.lp, &g.initial_basis, PivotRule::Dantzig, default_max_iters(&g.lp)).unwrap();
        if dantzig.iterations() != (1 << m) - 1 {
            problems.push(format!("m={m}: Dantzig took {}", dantzig.iterations()));
        }
        let steep = solve(&g.lp, &g.initial_basis, PivotRule::STEEPEST_EDGE, default_max_iters(&g.lp)).unwrap();
        counts.push(format!("{}/{}", dantzig.iterations(), steep.iterations()));
        let q = compute_q(&g.lp, cat, NormOrder::STEEPEST).unwrap();
        let x0 = &cat.get(&g.initial_basis).unwrap().solution.objective;
        match evaluate_bounds(cat, &q, NormOrder::STEEPEST, x0) {
            Ok(b) => {
                for kind in BoundKind::PNORM {
                    if steep.iterations() as u64 > b.limit(kind) {
                        problems.push(format!("m={m}: steepest edge {} > {} {}", steep.iterations(), kind.name(), b.limit(kind)));
                    }
                }
            }
            Err(e) => problems.push(format!("m={m}: {e}")),
        }
    }
    Verdict::new(format!("m = 2..8, Dantzig/steepest iterations {}", counts.join(" ")), problems)
}

fn criterion7(corpus: &[CorpusItem]) -> Verdict {
    let mut problems = Vec::new();
    let mut traces = 0;
    for item in corpus {
        for s in item.solved.iter().filter(|s| s.rule.norm_order().is_none()) {
            traces += 1;
            let t = s.trace.iterations() as u64;
            if t == 0 {
                continue;
            }
            let x0 = &s.trace.initial_solution.objective;
            match evaluate_km_bounds(&item.catalog, x0) {
                Ok(km) => {
                    for kind in BoundKind::DANTZIG {
                        let limit = km.limit(kind).unwrap();
                        if t > limit {
                            problems.push(format!("{} {}: {t} > {} {limit}", item.lp.name(), s.rule, kind.name()));
                        }
                    }
                }
                Err(e) => problems.push(format!("{} {}: {e}", item.lp.name(), s.rule)),
            }
            if let Some(r) = &s.report {
                if !r.all_pass {
                    problems.push(format!("{} {}: verifier failures", item.lp.name(), s.rule));
                }
            }
        }
    }
    Verdict::new(format!("{traces} Dantzig/best-improvement traces"), problems)
}

fn criterion8() -> Verdict {
    let mut jobs = Vec::new();
    for m in 1..=6 {
        for k in [2, 3] {
            for theta in [(1, 2), (9, 10)] {
                jobs.push((m, k, theta));
            }
        }
    }
    let count = jobs.len();
    let results = in_parallel(jobs, |(m, k, (tn, td))| -> Vec<String> {
        let theta = Q::new(tn.into(), td.into());
        let mut problems = Vec::new();
        let d = match dmdp_generate(m, k, &theta, (m * 100 + k * 10) as u64 + tn as u64) {
            Ok(d) => d,
            Err(e) => return vec![format!("m={m} k={k}: {e}")],
        };
        let name = d.lp.name().to_string();
        let cat = enumerate_bfs(&d.lp, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let hi = int(m as i64) / (Q::one() - &theta);
        for e in &cat.entries {
            for v in e.solution.basic_values() {
                if *v < Q::one() || *v > hi {
                    problems.push(format!("{name}: basic value {v} at {} outside [1, {hi}]", e.basis()));
                }
            }
        }
        for order in [NormOrder::STEEPEST, NormOrder::Infinity] {
            let trace = solve(&d.lp, &d.initial_basis, PivotRule::PNorm(order), default_max_iters(&d.lp)).unwrap();
            let limit = dmdp_limit(m, d.n(), &theta, order).unwrap();
            if !trace.is_optimal() || trace.iterations() as u64 > limit {
                problems.push(format!("{name} p={order}: {} iterations, limit {limit}", trace.iterations()));
            }
        }
        problems
    });
    Verdict::new(format!("{count} DMDPs (m 1..6, k 2/3, theta 1/2 and 9/10), p = 2 and inf"), results.into_iter().flatten().collect())
}

fn criterion9(corpus: &[CorpusItem]) -> Verdict {
    let mut problems = Vec::new();
    let mut iterates = 0;
    for item in corpus {
        let y = &item.dual.y;
        let s_star = &item.dual.s;
        let by: Q = item.lp.b().iter().zip(y).map(|(b, v)| b * v).sum();
        // s* = c − Aᵀy*, recomputed
        for j in 0..item.lp.n() {
            let col: Q = (0..item.lp.m()).map(|i| &item.lp.a()[(i, j)] * &y[i]).sum();
            if &item.lp.c()[j] - col != s_star[j] {
                problems.push(format!("{}: s* mismatch at x{}", item.lp.name(), j + 1));
            }
        }
        for s in &item.solved {
            let bases = s.trace.bases();
            for (t, b) in bases.iter().enumerate() {
                iterates += 1;
                let x = &item.catalog.get(b).unwrap().solution.x;
                let lhs = objective(&item.lp, x) - &by;
                let rhs: Q = x.iter().zip(s_star).map(|(a, b)| a * b).sum();
                if lhs != rhs {
                    problems.push(format!("{} {} t={t}: gap identity", item.lp.name(), s.rule));
                }
                if t + 1 == bases.len() && objective(&item.lp, x) != by {
                    problems.push(format!("{} {}: strong duality", item.lp.name(), s.rule));
                }
            }
        }
    }
    Verdict::new(format!("{iterates} iterates"), problems)
}

fn criterion10() -> Verdict {
    let config = ExperimentConfig::from_json(
        r#"{
            "instances": [
                {"kind": "random_corpus", "count": 24, "min_m": 2, "max_m": 4, "max_n": 8},
                {"kind": "klee_minty", "dims": [3, 4]},
                {"kind": "dmdp", "m": 3, "k": 2, "theta": "9/10"}
            ],
            "rules": ["dantzig", "best", "pnorm"],
            "p_values": ["1", "2", "3", "inf"],
            "seeds": [1, 2],
            "decimal": true
        }"#,
    )
    .unwrap();
    let runs = [Execution::Parallel, Execution::Parallel, Execution::Sequential].map(|exec| {
        let report = run_experiment_with(&config, exec).unwrap();
        (report.to_csv().unwrap(), report.all_pass(), report.rows.len())
    });
    let mut problems = Vec::new();
    if runs[0].0 != runs[1].0 {
        problems.push("two parallel runs differ".into());
    }
    if runs[0].0 != runs[2].0 {
        problems.push("parallel and sequential runs differ".into());
    }
    if !runs[0].1 {
        problems.push("some experiment rows fail their checks".into());
    }
    Verdict::new(format!("3 runs of a {}-row experiment, {} bytes each", runs[0].2, runs[0].0.len()), problems)
}

fn main() -> ExitCode {
    let corpus = match build_corpus() {
        Ok(c) => c,
        Err(e) => {
            println!("corpus generation failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let km: Vec<(GeneratedLp, BfsCatalog)> = (2..=8)
        .map(|m| {
            let g = klee_minty(m).unwrap();
            let cat = enumerate_bfs(&g.lp, DEFAULT_ENUMERATION_BUDGET).unwrap();
            (g, cat)
        })
        .collect();
    let verdicts = [
        ("bound conformance for the p-norm rule (thm3..thm6)", criterion1(&corpus)),
        ("per-iteration lemmas L1, L2, L3", criterion2(&corpus)),
        ("q lower bound and column norm bounds", criterion3(&corpus)),
        ("p = 2 matches an independent steepest-edge oracle", criterion4(&corpus)),
        ("optimal objective equals the enumeration minimum", criterion5(&corpus, &km)),
        ("Klee-Minty path length and steepest-edge bounds", criterion6(&km)),
        ("Dantzig and best-improvement bounds (km1, km2)", criterion7(&corpus)),
        ("DMDP basic-value range and p-norm bound", criterion8()),
        ("duality identities", criterion9(&corpus)),
        ("deterministic experiment output", criterion10()),
    ];
    let mut out = String::new();
    let mut all = true;
    for (i, (title, v)) in verdicts.iter().enumerate() {
        all &= v.pass;
        let status = if v.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {:>2}: {status}  {title}: {}", i + 1, v.summary).unwrap();
        for p in v.problems.iter().take(5) {
            writeln!(out, "    {p}").unwrap();
        }
        if v.problems.len() > 5 {
            writeln!(out, "    ... {} more", v.problems.len() - 5).unwrap();
        }
    }
    print!("{out}");
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
