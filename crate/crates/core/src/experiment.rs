//! Batch experiments: generate or load instances, solve them under several
//! rules, enumerate, evaluate the bounds and verify every trace. One row per
//! (instance, rule) pair.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{compute_q_with, enumerate_bfs_with, verify_trace, BfsCatalog, QReport, DEFAULT_ENUMERATION_BUDGET};
use crate::engine::{default_max_iters, phase_one, solve, SolveTrace};
use crate::generators::{dmdp_bound, dmdp_generate, dmdp_limit, klee_minty, random_lp, GenError};
use crate::io::{Instance, IoError};
use crate::lp::dual_solution;
use crate::par::{self, Execution};
use crate::pivot::{NormOrder, PivotRule};
use crate::rational::{self, Rational, Scalar};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("could not write table: {0}")]
    Output(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// One entry of `instances` in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    /// An instance JSON file.
    File { path: PathBuf },
    /// One random instance per configured seed.
    Random {
        m: usize,
        n: usize,
        #[serde(default = "default_range")]
        range: i64,
    },
    /// `count` random instances cycling through every `(m, n)` with
    /// `min_m ≤ m ≤ max_m` and `m + 2 ≤ n ≤ max_n`; instance `i` uses seed
    /// `first_seed + i`.
    RandomCorpus {
        count: usize,
        min_m: usize,
        max_m: usize,
        max_n: usize,
        #[serde(default = "default_first_seed")]
        first_seed: u64,
        #[serde(default = "default_range")]
        range: i64,
    },
    KleeMinty { dims: Vec<usize> },
    /// One DMDP per configured seed.
    Dmdp { m: usize, k: usize, theta: Scalar },
}

fn default_range() -> i64 {
    9
}

fn default_first_seed() -> u64 {
    1
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_budget() -> u64 {
    DEFAULT_ENUMERATION_BUDGET
}

/// `rules` holds designators (`dantzig`, `best`, `steepest`, `pnorm:<p>`,
/// `pnorm:inf`); a bare `pnorm` expands over `p_values`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSource>,
    pub rules: Vec<String>,
    #[serde(default)]
    pub p_values: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Adds non-authoritative 12-digit decimal columns.
    #[serde(default)]
    pub decimal: bool,
    #[serde(default = "default_budget")]
    pub enumeration_budget: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.resolved_rules()?;
        Ok(config)
    }

    /// Rules in config order, with `pnorm` expanded over `p_values`.
    pub fn resolved_rules(&self) -> Result<Vec<PivotRule>, ExperimentError> {
        if self.instances.is_empty() {
            return Err(ExperimentError::Config("no instance sources".into()));
        }
        if self.rules.is_empty() {
            return Err(ExperimentError::Config("no rules".into()));
        }
        let mut out = Vec::new();
        for designator in &self.rules {
            if designator == "pnorm" {
                if self.p_values.is_empty() {
                    return Err(ExperimentError::Config("rule `pnorm` needs p_values".into()));
                }
                for p in &self.p_values {
                    let order: NormOrder = p.parse().map_err(|e| ExperimentError::Config(format!("{e}")))?;
                    out.push(PivotRule::PNorm(order));
                }
            } else {
                out.push(designator.parse().map_err(|e| ExperimentError::Config(format!("{e}")))?);
            }
        }
        Ok(out)
    }

    /// Instances in config order.
    pub fn load_instances(&self, exec: Execution) -> Result<Vec<Instance>, ExperimentError> {
        let mut jobs: Vec<Job> = Vec::new();
        for source in &self.instances {
            match source {
                InstanceSource::File { path } => jobs.push(Job::File(path.clone())),
                InstanceSource::Random { m, n, range } => {
                    jobs.extend(self.seeds.iter().map(|&seed| Job::Random { m: *m, n: *n, seed, range: *range }))
                }
                InstanceSource::RandomCorpus { count, min_m, max_m, max_n, first_seed, range } => {
                    let shapes: Vec<(usize, usize)> =
                        (*min_m..=*max_m).flat_map(|m| (m + 2..=*max_n).map(move |n| (m, n))).collect();
                    if shapes.is_empty() {
                        return Err(ExperimentError::Config("random_corpus has no (m, n) pairs".into()));
                    }
                    jobs.extend((0..*count).map(|i| {
                        let (m, n) = shapes[i % shapes.len()];
                        Job::Random { m, n, seed: first_seed + i as u64, range: *range }
                    }));
                }
                InstanceSource::KleeMinty { dims } => jobs.extend(dims.iter().map(|&m| Job::KleeMinty(m))),
                InstanceSource::Dmdp { m, k, theta } => jobs.extend(
                    self.seeds.iter().map(|&seed| Job::Dmdp { m: *m, k: *k, theta: theta.0.clone(), seed }),
                ),
            }
        }
        par::map(exec, &jobs, Job::run).into_iter().collect()
    }
}

enum Job {
    File(PathBuf),
    Random { m: usize, n: usize, seed: u64, range: i64 },
    KleeMinty(usize),
    Dmdp { m: usize, k: usize, theta: Rational, seed: u64 },
}

impl Job {
    fn run(&self) -> Result<Instance, ExperimentError> {
        Ok(match self {
            Job::File(path) => Instance::read(path)?,
            Job::Random { m, n, seed, range } => random_lp(*m, *n, *seed, *range)?.into(),
            Job::KleeMinty(m) => klee_minty(*m)?.into(),
            Job::Dmdp { m, k, theta, seed } => Instance::from(&dmdp_generate(*m, *k, theta, *seed)?),
        })
    }
}

/// One (instance, rule) result. Rationals are canonical `p/q` strings;
/// absent values are empty cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentRow {
    pub instance: String,
    pub rule: String,
    pub p: Option<String>,
    pub m: usize,
    pub n: usize,
    pub gamma: Option<String>,
    pub delta: Option<String>,
    pub q: Option<String>,
    pub iterations: Option<usize>,
    pub thm3: Option<u64>,
    pub thm4: Option<u64>,
    pub thm5: Option<u64>,
    pub thm6: Option<u64>,
    pub km1: Option<u64>,
    pub km2: Option<u64>,
    pub km3: Option<u64>,
    pub all_checks_pass: bool,
    pub dmdp_thm7: Option<u64>,
    pub outcome: Option<String>,
    /// Objective of the last basis visited.
    pub objective: Option<String>,
    /// Names of the failed checks, `;`-separated.
    pub failed_checks: String,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_decimal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_decimal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_decimal: Option<String>,
}

impl ExperimentRow {
    fn new(instance: &Instance, rule: PivotRule) -> Self {
        Self {
            instance: instance.lp.name().to_string(),
            rule: rule.to_string(),
            p: rule.norm_order().map(|o| o.to_string()),
            m: instance.lp.m(),
            n: instance.lp.n(),
            gamma: None,
            delta: None,
            q: None,
            iterations: None,
            thm3: None,
            thm4: None,
            thm5: None,
            thm6: None,
            km1: None,
            km2: None,
            km3: None,
            all_checks_pass: false,
            dmdp_thm7: None,
            outcome: None,
            objective: None,
            failed_checks: String::new(),
            error: None,
            gamma_decimal: None,
            delta_decimal: None,
            q_decimal: None,
        }
    }

    fn fail(mut self, error: impl ToString) -> Self {
        self.all_checks_pass = false;
        self.error = Some(error.to_string());
        self
    }
}

const COLUMNS: [&str; 22] = [
    "instance", "rule", "p", "m", "n", "gamma", "delta", "q", "iterations", "thm3", "thm4", "thm5", "thm6", "km1",
    "km2", "km3", "all_checks_pass", "dmdp_thm7", "outcome", "objective", "failed_checks", "error",
];
const DECIMAL_COLUMNS: [&str; 3] = ["gamma_decimal", "delta_decimal", "q_decimal"];

impl ExperimentRow {
    fn cells(&self, decimal: bool) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        let mut out = vec![
            self.instance.clone(),
            self.rule.clone(),
            opt(&self.p),
            self.m.to_string(),
            self.n.to_string(),
            opt(&self.gamma),
            opt(&self.delta),
            opt(&self.q),
            opt(&self.iterations),
            opt(&self.thm3),
            opt(&self.thm4),
            opt(&self.thm5),
            opt(&self.thm6),
            opt(&self.km1),
            opt(&self.km2),
            opt(&self.km3),
            self.all_checks_pass.to_string(),
            opt(&self.dmdp_thm7),
            opt(&self.outcome),
            opt(&self.objective),
            self.failed_checks.clone(),
            opt(&self.error),
        ];
        if decimal {
            out.extend([opt(&self.gamma_decimal), opt(&self.delta_decimal), opt(&self.q_decimal)]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    #[serde(skip)]
    pub decimal: bool,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.all_checks_pass)
    }

    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let out = |e: csv::Error| ExperimentError::Output(e.to_string());
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = COLUMNS.to_vec();
        if self.decimal {
            header.extend(DECIMAL_COLUMNS);
        }
        writer.write_record(&header).map_err(out)?;
        for row in &self.rows {
            writer.write_record(row.cells(self.decimal)).map_err(out)?;
        }
        let bytes = writer.into_inner().map_err(|e| ExperimentError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| ExperimentError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("rows serialize");
        text.push('\n');
        text
    }

    pub fn render(&self, format: OutputFormat) -> Result<String, ExperimentError> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => Ok(self.to_json()),
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    run_experiment_with(config, Execution::default())
}

/// Instances are processed in parallel under `exec`; rows come back in
/// config order (instances, then rules).
pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport, ExperimentError> {
    let rules = config.resolved_rules()?;
    let instances = config.load_instances(exec)?;
    let rows = par::map(exec, &instances, |instance| instance_rows(config, &rules, instance));
    Ok(ExperimentReport { rows: rows.into_iter().flatten().collect(), decimal: config.decimal })
}

fn decimal(v: &Rational) -> String {
    rational::to_decimal(v, 12)
}

fn instance_rows(config: &ExperimentConfig, rules: &[PivotRule], instance: &Instance) -> Vec<ExperimentRow> {
    let lp = &instance.lp;
    // enumeration runs sequentially here: instances already run in parallel
    let catalog = enumerate_bfs_with(lp, config.enumeration_budget, Execution::Sequential);
    let initial = match &instance.initial_basis {
        Some(b) => Ok(b.clone()),
        None => phase_one(lp),
    };
    let mut q_cache: BTreeMap<NormOrder, Result<QReport, String>> = BTreeMap::new();
    rules
        .iter()
        .map(|&rule| {
            let mut row = ExperimentRow::new(instance, rule);
            let catalog = match &catalog {
                Ok(c) => c,
                Err(e) => return row.fail(e),
            };
            row.gamma = catalog.gamma.as_ref().map(rational::format);
            row.delta = catalog.delta.as_ref().map(rational::format);
            if config.decimal {
                row.gamma_decimal = catalog.gamma.as_ref().map(decimal);
                row.delta_decimal = catalog.delta.as_ref().map(decimal);
            }
            let initial = match &initial {
                Ok(b) => b,
                Err(e) => return row.fail(e),
            };
            let trace = match solve(lp, initial, rule, config.max_iters.unwrap_or_else(|| default_max_iters(lp))) {
                Ok(t) => t,
                Err(e) => return row.fail(e),
            };
            row.iterations = Some(trace.iterations());
            row.outcome = Some(trace.outcome.label().to_string());
            row.objective = Some(rational::format(&trace.final_objective));
            let qrep = match rule.norm_order() {
                Some(order) => {
                    let entry = q_cache.entry(order).or_insert_with(|| {
                        compute_q_with(lp, catalog, order, Execution::Sequential).map_err(|e| e.to_string())
                    });
                    match entry {
                        Ok(q) => {
                            row.q = Some(q.q_display());
                            if config.decimal {
                                row.q_decimal = Some(decimal(&q.q_interval(64).lo));
                            }
                            Some(q.clone())
                        }
                        Err(e) => return row.fail(e.clone()),
                    }
                }
                None => None,
            };
            verify_row(row, instance, catalog, &trace, qrep.as_ref())
        })
        .collect()
}

fn verify_row(
    mut row: ExperimentRow,
    instance: &Instance,
    catalog: &BfsCatalog,
    trace: &SolveTrace,
    qrep: Option<&QReport>,
) -> ExperimentRow {
    let lp = &instance.lp;
    let dual = match dual_solution(lp, &catalog.optimal_basis) {
        Ok(d) => d,
        Err(e) => return row.fail(e),
    };
    let report = match verify_trace(lp, trace, catalog, qrep, &dual) {
        Ok(r) => r,
        Err(e) => return row.fail(e),
    };
    if let Some(b) = &report.bounds {
        (row.thm3, row.thm4, row.thm5, row.thm6) = (Some(b.thm3), Some(b.thm4), Some(b.thm5), Some(b.thm6));
    }
    if let Some(k) = &report.km_bounds {
        (row.km1, row.km2, row.km3) = (Some(k.km1), Some(k.km2), Some(k.km3));
    }
    let mut failed: Vec<String> = report.failures().map(|c| c.name.clone()).collect();

    if let Some(d) = &instance.dmdp {
        let ceiling = rational::int(d.m as i64) / (Rational::one() - &d.theta);
        if !catalog.basic_values_within(&rational::int(1), &ceiling) {
            failed.push("ye_range".into());
        }
        if let Some(order) = trace.rule.norm_order() {
            match (dmdp_bound(lp.m(), lp.n(), &d.theta, order), dmdp_limit(lp.m(), lp.n(), &d.theta, order)) {
                (Ok(bound), Ok(limit)) => {
                    row.dmdp_thm7 = Some(bound);
                    if trace.iterations() as u64 > limit {
                        failed.push("dmdp_thm7".into());
                    }
                }
                (Err(e), _) | (_, Err(e)) => return row.fail(e),
            }
        }
    }
    row.all_checks_pass = failed.is_empty();
    row.failed_checks = failed.join(";");
    row
}
