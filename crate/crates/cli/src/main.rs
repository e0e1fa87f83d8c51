//! `pnorm`: generate instances, solve them under a chosen pivot rule,
//! enumerate and evaluate iteration bounds, verify traces, and run batch
//! experiments.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pnorm_simplex::analysis::{
    compute_q_with, enumerate_bfs_with, evaluate_bounds, evaluate_km_bounds, verify_trace, AnalysisError, BfsCatalog,
    DEFAULT_ENUMERATION_BUDGET,
};
use pnorm_simplex::engine::{default_max_iters, phase_one, solve, EngineError, Outcome};
use pnorm_simplex::experiment::{run_experiment_with, ExperimentConfig, OutputFormat};
use pnorm_simplex::generators::{dmdp_generate, klee_minty, random_lp};
use pnorm_simplex::io::{read_trace, write_trace, Instance};
use pnorm_simplex::lp::{dual_solution, Basis};
use pnorm_simplex::rational;
use pnorm_simplex::{Execution, NormOrder, PivotRule};

mod exit {
    pub const OTHER: u8 = 1;
    pub const UNBOUNDED: u8 = 3;
    pub const INFEASIBLE: u8 = 4;
    pub const DEGENERATE_PIVOT: u8 = 5;
    pub const ITERATION_LIMIT: u8 = 6;
    pub const DEGENERATE_INSTANCE: u8 = 7;
    pub const BUDGET_EXCEEDED: u8 = 8;
    pub const CHECK_FAILED: u8 = 9;
    pub const PARSE: u8 = 10;
}

/// An error carrying its exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn failure(code: u8, message: impl Into<String>) -> anyhow::Error {
    Failure { code, message: message.into() }.into()
}

fn analysis_failure(e: AnalysisError) -> anyhow::Error {
    let code = match e {
        AnalysisError::DegenerateInstance => exit::DEGENERATE_INSTANCE,
        AnalysisError::BudgetExceeded { .. } => exit::BUDGET_EXCEEDED,
        _ => exit::OTHER,
    };
    failure(code, e.to_string())
}

#[derive(Parser)]
#[command(name = "pnorm", version, about = "Exact-rational simplex workbench for the p-norm pivoting rule")]
struct Cli {
    /// Run enumeration and experiments on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Run the simplex method and write the trace.
    Solve(SolveArgs),
    /// Enumerate all BFSs, compute q and the iteration bounds.
    Analyze(AnalyzeArgs),
    /// Run a batch described by a JSON config.
    Experiment(ExperimentArgs),
    /// Re-check a trace against the enumeration oracle.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum Family {
    /// Klee–Minty cube of dimension m.
    Kleeminty {
        #[arg(long)]
        m: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random nondegenerate LP with a feasible, non-optimal start.
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Entries are drawn from [-range, range].
        #[arg(long, default_value_t = 9)]
        range: i64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Discounted MDP with m states and k actions per state.
    Dmdp {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        /// Discount factor as an integer or p/q.
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// dantzig | best | steepest | pnorm:<p> | pnorm:inf
    #[arg(long, default_value = "steepest")]
    rule: PivotRule,
    /// Comma-separated 1-based basis; overrides the instance's own. Phase one
    /// is used when neither is given.
    #[arg(long, value_delimiter = ',')]
    initial: Option<Vec<usize>>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Trace path (default: `<instance stem>.trace.json` next to the instance).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    instance: PathBuf,
    #[arg(long, default_value = "2")]
    p: NormOrder,
    #[arg(long, value_delimiter = ',')]
    initial: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
    /// Report path (default: `<instance stem>.analysis.json`).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Overrides the config's output path; `-` writes to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Add 12-significant-digit decimal columns (not authoritative).
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    trace: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
    /// Report path; the report is printed to stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<Failure>().map_or(exit::OTHER, |f| f.code))
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<u8> {
    match command {
        Command::Generate { family } => generate(family),
        Command::Solve(args) => cmd_solve(args),
        Command::Analyze(args) => cmd_analyze(args, exec),
        Command::Experiment(args) => cmd_experiment(args, exec),
        Command::Verify(args) => cmd_verify(args, exec),
    }
}

fn load(path: &Path) -> Result<Instance> {
    Instance::read(path).map_err(|e| failure(exit::PARSE, e.to_string()))
}

fn sibling(instance: &Path, suffix: &str) -> PathBuf {
    let stem = instance.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
    instance.with_file_name(format!("{stem}.{suffix}"))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(family: Family) -> Result<u8> {
    let (instance, output) = match family {
        Family::Kleeminty { m, output } => (Instance::from(klee_minty(m)?), output),
        Family::Random { m, n, seed, range, output } => (Instance::from(random_lp(m, n, seed, range)?), output),
        Family::Dmdp { m, k, theta, seed, output } => {
            let theta = rational::parse(&theta).map_err(|e| failure(exit::PARSE, format!("theta: {e}")))?;
            (Instance::from(&dmdp_generate(m, k, &theta, seed)?), output)
        }
    };
    write_text(output.as_deref(), &instance.to_json())?;
    Ok(0)
}

/// The `--initial` basis, else the instance's, else phase one.
fn starting_basis(instance: &Instance, initial: Option<Vec<usize>>) -> Result<Basis> {
    let lp = &instance.lp;
    if let Some(one_based) = initial {
        if one_based.contains(&0) {
            return Err(failure(exit::PARSE, "basis indices are 1-based"));
        }
        return Basis::new(lp, one_based.into_iter().map(|j| j - 1)).map_err(|e| failure(exit::PARSE, e.to_string()));
    }
    if let Some(b) = &instance.initial_basis {
        return Ok(b.clone());
    }
    phase_one(lp).map_err(|e| match e {
        EngineError::Infeasible(_) => failure(exit::INFEASIBLE, format!("Infeasible: {e}")),
        other => other.into(),
    })
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let instance = load(&args.instance)?;
    let lp = &instance.lp;
    let initial = starting_basis(&instance, args.initial)?;
    let max_iters = args.max_iters.unwrap_or_else(|| default_max_iters(lp));
    let trace = solve(lp, &initial, args.rule, max_iters).map_err(|e| match e {
        EngineError::InfeasibleInitialBasis(_) => failure(exit::INFEASIBLE, e.to_string()),
        other => other.into(),
    })?;
    let path = args.trace.unwrap_or_else(|| sibling(&args.instance, "trace.json"));
    write_trace(&path, &trace)?;
    let objective = rational::format(&trace.final_objective);
    let iterations = trace.iterations();
    let code = match &trace.outcome {
        Outcome::Optimal { .. } => {
            println!("Optimal, {iterations} iterations, objective {objective}");
            0
        }
        Outcome::Unbounded { entering } => {
            println!("Unbounded, {iterations} iterations, ray along x{}", entering + 1);
            exit::UNBOUNDED
        }
        Outcome::IterationLimit => {
            println!("IterationLimit, {iterations} iterations, objective {objective}");
            exit::ITERATION_LIMIT
        }
        Outcome::DegeneratePivot { entering, leaving } => {
            println!("DegeneratePivot, {iterations} iterations, x{} would replace x{} with a zero step", entering + 1, leaving + 1);
            exit::DEGENERATE_PIVOT
        }
    };
    Ok(code)
}

fn enumerate(instance: &Instance, budget: u64, exec: Execution) -> Result<BfsCatalog> {
    enumerate_bfs_with(&instance.lp, budget, exec).map_err(analysis_failure)
}

fn cmd_analyze(args: AnalyzeArgs, exec: Execution) -> Result<u8> {
    let instance = load(&args.instance)?;
    let catalog = enumerate(&instance, args.budget, exec)?;
    let summary = catalog.summary();
    let opt = |v: &Option<pnorm_simplex::Rational>| v.as_ref().map_or("-".to_string(), rational::format);
    println!("instance {}: {} feasible bases of {} examined", summary.instance, summary.feasible_bases, catalog.subsets_examined);
    println!(
        "gamma={} delta={} z*={} z_second={} nondegenerate={}",
        opt(&summary.gamma),
        opt(&summary.delta),
        rational::format(&summary.z_star),
        opt(&summary.z_second),
        summary.nondegenerate
    );
    if !catalog.nondegenerate {
        return Err(failure(exit::DEGENERATE_INSTANCE, "instance is degenerate: bounds are not defined"));
    }
    let qrep = compute_q_with(&instance.lp, &catalog, args.p, exec).map_err(analysis_failure)?;
    let initial = starting_basis(&instance, args.initial)?;
    let x0 = catalog
        .get(&initial)
        .map(|e| e.objective().clone())
        .ok_or_else(|| failure(exit::INFEASIBLE, format!("initial basis {initial} is not feasible")))?;
    let (bounds, note) = match evaluate_bounds(&catalog, &qrep, args.p, &x0) {
        Ok(b) => {
            println!(
                "gamma={} delta={} q={} thm3={} thm4={} thm5={} thm6={} km1={} km2={} km3={}",
                opt(&summary.gamma),
                opt(&summary.delta),
                qrep.q_display(),
                b.thm3,
                b.thm4,
                b.thm5,
                b.thm6,
                b.km1,
                b.km2,
                b.km3
            );
            (Some(b), None)
        }
        Err(e @ (AnalysisError::InitialOptimal(_) | AnalysisError::MissingSecondBest)) => {
            println!("q={}; bounds not evaluated: {e}", qrep.q_display());
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(analysis_failure(e)),
    };
    // the p-norm report already carries km1..km3
    let km = bounds.is_none().then(|| evaluate_km_bounds(&catalog, &x0).ok()).flatten();
    let report = serde_json::json!({
        "catalog": summary,
        "initial_basis": initial,
        "initial_objective": rational::format(&x0),
        "q": qrep,
        "q_text": qrep.q_display(),
        "bounds": bounds,
        "km_bounds": km,
        "note": note,
    });
    let path = args.output.unwrap_or_else(|| sibling(&args.instance, "analysis.json"));
    write_text(Some(&path), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(0)
}

fn cmd_experiment(args: ExperimentArgs, exec: Execution) -> Result<u8> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = ExperimentConfig::from_json(&text).map_err(|e| failure(exit::PARSE, e.to_string()))?;
    if let Some(f) = args.format {
        config.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    config.decimal |= args.decimal;
    // relative file sources resolve against the config's directory
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    for source in &mut config.instances {
        if let pnorm_simplex::experiment::InstanceSource::File { path } = source {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
    let report = run_experiment_with(&config, exec)?;
    let output = args.output.or_else(|| config.output.as_ref().map(|p| if p.is_relative() { base.join(p) } else { p.clone() }));
    write_text(output.as_deref(), &report.render(config.format)?)?;
    let failed = report.rows.iter().filter(|r| !r.all_checks_pass).count();
    eprintln!("{} rows, {} failing", report.rows.len(), failed);
    Ok(if failed == 0 { 0 } else { exit::CHECK_FAILED })
}

fn cmd_verify(args: VerifyArgs, exec: Execution) -> Result<u8> {
    let instance = load(&args.instance)?;
    let trace = read_trace(&args.trace).map_err(|e| failure(exit::PARSE, e.to_string()))?;
    let lp = &instance.lp;
    let catalog = enumerate(&instance, args.budget, exec)?;
    let qrep = match trace.rule.norm_order() {
        Some(order) => Some(compute_q_with(lp, &catalog, order, exec).map_err(analysis_failure)?),
        None => None,
    };
    let dual = dual_solution(lp, &catalog.optimal_basis)?;
    let report = verify_trace(lp, &trace, &catalog, qrep.as_ref(), &dual).map_err(|e| match e {
        AnalysisError::TraceNotOptimal(_) | AnalysisError::CatalogMismatch(_) => failure(exit::CHECK_FAILED, e.to_string()),
        other => analysis_failure(other),
    })?;
    for check in &report.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        match (&check.first_failure, &check.detail) {
            (Some(t), Some(d)) => println!("{status} {} (t = {t}: {d})", check.name),
            (None, Some(d)) => println!("{status} {} ({d})", check.name),
            _ => println!("{status} {}", check.name),
        }
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &args.output {
        write_text(Some(path), &text)?;
    }
    Ok(if report.all_pass { 0 } else { exit::CHECK_FAILED })
}
