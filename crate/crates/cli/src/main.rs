//! `qdepth`: generate instances, run the reference solvers, run verification suites and
//! summarise solve reports.
//!
//! Exit codes: 0 success, 1 threshold miss or failed check, 2 usage error, 3 model-grammar
//! violation.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdepth_core::analysis::{run_suite, AnalysisError, Suite};
use qdepth_core::models::{trial_rng, Model, ModelError};
use qdepth_core::problems::{
    sample_scs, sample_serial, sample_simon, sample_ss, InstanceFile, ProblemError, ProblemInstance, SimonProblem, Variant,
};
use qdepth_core::solvers::{default_budget, expected_answer, problem_name, solve, SolverError};
use rayon::prelude::*;
use report::{to_csv, to_json, SolveConfig, SolveReport, TableRow, Timing, TimingRow, TrialRow, VerifyReport};
use thiserror::Error;

const OUT_DIR_ENV: &str = "QDEPTH_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "qdepth-out";

#[derive(Parser, Debug)]
#[command(name = "qdepth", version, about = "Depth-bounded hybrid quantum-classical query experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an instance and write it as JSON.
    Gen(GenArgs),
    /// Run a reference solver over seeded trials and write a report.
    Solve(SolveArgs),
    /// Run one verification suite.
    Verify(VerifyArgs),
    /// Summarise the solve reports in a directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Simon,
    Serial,
    Ss,
    Scs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Qnc,
    Qc,
    Cq,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Qnc => Model::Qnc,
            ModelArg::Qc => Model::Qc,
            ModelArg::Cq => Model::Cq,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Search,
    Decision,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Search => Variant::Search,
            VariantArg::Decision => Variant::Decision,
        }
    }
}

#[derive(Args, Debug)]
struct InstanceArgs {
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    /// Bits per input.
    #[arg(long)]
    n: Option<u32>,
    /// Serial levels or shuffler depth; ignored for plain Simon.
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, value_enum, default_value = "search")]
    variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Output file; defaults to a name derived from the parameters in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Depth budget; defaults to the budget the solver is built for.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Minimum success rate for exit code 0.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    threshold: f64,
    /// Reuse one instance file for every trial instead of sampling per trial.
    #[arg(long)]
    instance_file: Option<PathBuf>,
    /// Output directory (overrides the environment).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Divide every Monte Carlo sample count by this factor.
    #[arg(long, default_value_t = 1)]
    scale_down: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding solve reports (defaults to the output directory).
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Where to write the CSV table; defaults to `table.csv` in the directory.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("validation failed ({kind}): {message}")]
    Violation { kind: &'static str, message: String },
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Violation { .. } => 3,
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Model(ModelError::Violation(v)) => CliError::Violation { kind: v.kind(), message: v.to_string() },
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn problem_label(p: ProblemArg) -> &'static str {
    match p {
        ProblemArg::Simon => "simon",
        ProblemArg::Serial => "serial",
        ProblemArg::Ss => "ss",
        ProblemArg::Scs => "scs",
    }
}

fn sample(problem: ProblemArg, n: u32, d: usize, variant: Variant, rng: &mut rand_chacha::ChaCha8Rng) -> Result<ProblemInstance, ProblemError> {
    Ok(match problem {
        ProblemArg::Simon => ProblemInstance::Simon(sample_simon(n, rng)?),
        ProblemArg::Serial => ProblemInstance::Serial(sample_serial(d, n, &SimonProblem, variant, rng)?),
        ProblemArg::Ss => ProblemInstance::Ss(sample_ss(d, n, variant, rng)?),
        ProblemArg::Scs => ProblemInstance::Scs(sample_scs(d, n, rng)?),
    })
}

fn require(args: &InstanceArgs) -> Result<(ProblemArg, u32), CliError> {
    match (args.problem, args.n) {
        (Some(p), Some(n)) => Ok((p, n)),
        _ => Err(CliError::Usage("--problem and --n are required unless an instance file is given".into())),
    }
}

/// The instance `gen` writes for a seed is the one trial 0 of `solve` samples.
fn gen(args: GenArgs) -> Result<(), CliError> {
    let (problem, n) = require(&args.instance)?;
    let seed = args.instance.seed;
    let instance = sample(problem, n, args.instance.d, args.instance.variant.into(), &mut trial_rng(seed, 0))?;
    let path = args.out.unwrap_or_else(|| {
        out_dir(None).join(format!("instance-{}-n{n}-d{}-s{seed}.json", problem_label(problem), args.instance.d))
    });
    write(&path, &InstanceFile::new(seed, instance).to_json())?;
    println!("{}", path.display());
    Ok(())
}

fn instance_shape(inst: &ProblemInstance) -> (u32, usize, Variant) {
    match inst {
        ProblemInstance::Simon(s) => (s.n, 0, Variant::Search),
        ProblemInstance::Serial(s) => (s.n, s.c, s.variant),
        ProblemInstance::Ss(s) => (s.n, s.d, s.variant),
        ProblemInstance::Scs(s) => (s.n, s.d, Variant::Search),
    }
}

fn solve_cmd(args: SolveArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::Usage(format!("threshold {} outside [0, 1]", args.threshold)));
    }
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let model: Model = args.model.into();
    let seed = args.instance.seed;
    let fixed = match &args.instance_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Some(InstanceFile::from_json(&text)?)
        }
        None => None,
    };
    // Shape of the run: from the instance file, or from the flags with trial 0 as the template.
    let template = match &fixed {
        Some(f) => {
            if let Some(p) = args.instance.problem {
                if problem_label(p) != problem_name(&f.instance) {
                    return Err(CliError::Usage(format!(
                        "--problem {} does not match the {} instance file",
                        problem_label(p),
                        problem_name(&f.instance)
                    )));
                }
            }
            f.instance.clone()
        }
        None => {
            let (problem, n) = require(&args.instance)?;
            sample(problem, n, args.instance.d, args.instance.variant.into(), &mut trial_rng(seed, 0))?
        }
    };
    let budget = match args.depth {
        Some(b) => b,
        None => default_budget(&template, model)?,
    };
    let (n, d, variant) = instance_shape(&template);
    let problem = problem_name(&template);
    let started = Instant::now();
    let results: Vec<(TrialRow, TimingRow)> = (0..args.trials)
        .into_par_iter()
        .map(|t| {
            let clock = Instant::now();
            let mut rng = trial_rng(seed, t as u64);
            let instance = match &fixed {
                Some(f) => f.instance.clone(),
                None => {
                    let (p, n) = require(&args.instance)?;
                    sample(p, n, args.instance.d, args.instance.variant.into(), &mut rng)?
                }
            };
            let expected = expected_answer(&instance);
            let rep = solve(&instance, model, budget, &mut rng)?;
            let row = TrialRow {
                trial: t,
                seed,
                stream: t as u64,
                success: rep.succeeded(expected),
                answer: rep.answer,
                expected,
                depth: rep.depth,
                oracle_layers: rep.oracle_layers,
                qbar: rep.quantum_queries,
                classical_queries: rep.classical_queries,
                stochastic_queries: rep.stochastic_queries,
                rounds: rep.rounds,
                failure: rep.failure,
            };
            Ok((row, TimingRow { trial: t, micros: clock.elapsed().as_micros() as u64 }))
        })
        .collect::<Result<_, CliError>>()?;
    let (rows, timing_rows): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let config = SolveConfig {
        problem: problem.into(),
        model,
        depth_budget: budget,
        n,
        d,
        variant,
        trials: args.trials,
        seed,
        threshold: args.threshold,
        instance_seed: fixed.as_ref().map(|f| f.seed),
    };
    let report = SolveReport::new(config, rows);
    let timing = Timing {
        schema: report::TIMING_SCHEMA.into(),
        version: report::VERSION,
        total_micros: started.elapsed().as_micros() as u64,
        rows: timing_rows,
    };
    let dir = out_dir(args.out);
    let stem = format!("solve-{problem}-{model}-b{budget}-n{n}-d{d}-s{seed}");
    write(&dir.join(format!("{stem}.json")), &to_json(&report))?;
    write(&dir.join(format!("{stem}.timing.json")), &to_json(&timing))?;
    write(&dir.join(format!("{stem}.csv")), &to_csv(&report.rows).map_err(|e| CliError::Usage(e.to_string()))?)?;
    let a = &report.aggregate;
    println!(
        "{problem} {model} depth {budget} n={n} d={d}: {}/{} = {:.3} (95% CI [{:.3}, {:.3}]) threshold {:.3} {}",
        a.successes,
        a.trials,
        a.rate,
        a.wilson_lo,
        a.wilson_hi,
        a.threshold,
        if a.pass { "PASS" } else { "MISS" }
    );
    println!("{}", dir.join(format!("{stem}.json")).display());
    if a.pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("success rate {:.3} below threshold {:.3}", a.rate, a.threshold)))
    }
}

fn verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.scale_down == 0 {
        return Err(CliError::Usage("--scale-down must be positive".into()));
    }
    let result = run_suite(args.suite, args.seed, args.scale_down)?;
    for c in &result.checks {
        let ci = c.ci.map(|[lo, hi]| format!(" ci [{lo:.4e}, {hi:.4e}]")).unwrap_or_default();
        println!(
            "{} {}: statistic {:.6e} bound {:.6e}{ci} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.bound,
            c.detail
        );
    }
    let pass = result.pass;
    let path = out_dir(args.out).join(format!("verify-{}-s{}.json", args.suite, args.seed));
    let wrapped = VerifyReport { schema: report::VERIFY_SCHEMA.into(), version: report::VERSION, report: result };
    write(&path, &to_json(&wrapped))?;
    println!("{}", path.display());
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("suite {} has failing checks", args.suite)))
    }
}

/// The reference rows of the upper-bound table, as `(problem, model)`.
const TABLE_ROWS: [(&str, Model); 6] = [
    ("simon", Model::Qnc),
    ("serial", Model::Cq),
    ("serial", Model::Qc),
    ("ss", Model::Cq),
    ("scs", Model::Qc),
    ("scs", Model::Cq),
];

fn load_reports(dir: &Path) -> Result<(Vec<TableRow>, Vec<String>), CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".timing.json"))
        .collect();
    entries.sort();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for path in entries {
        let text = fs::read_to_string(&path)?;
        let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else {
            skipped.push(format!("{}: not JSON", path.display()));
            continue;
        };
        if value.get("schema").and_then(|s| s.as_str()) != Some(report::SOLVE_SCHEMA) {
            continue;
        }
        match serde_json::from_value::<SolveReport>(value) {
            Ok(r) if r.version == report::VERSION => rows.push(TableRow::from_report(&r, &path)),
            Ok(r) => skipped.push(format!("{}: unsupported version {}", path.display(), r.version)),
            Err(e) => skipped.push(format!("{}: {e}", path.display())),
        }
    }
    let order = |r: &TableRow| {
        let pos = TABLE_ROWS.iter().position(|(p, m)| *p == r.problem && *m == r.model).unwrap_or(TABLE_ROWS.len());
        (pos, r.depth, r.n, r.d, r.seed)
    };
    rows.sort_by_key(order);
    Ok((rows, skipped))
}

fn render(rows: &[TableRow]) -> String {
    let mut out = format!(
        "{:<8} {:<5} {:>5} {:>3} {:>3} {:>6} {:>8} {:>17} {:>8}\n",
        "problem", "model", "depth", "n", "d", "trials", "success", "95% CI", "seed"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<8} {:<5} {:>5} {:>3} {:>3} {:>6} {:>8.3} {:>17} {:>8}\n",
            r.problem,
            r.model.to_string(),
            r.depth,
            r.n,
            r.d,
            r.trials,
            r.rate,
            format!("[{:.3}, {:.3}]", r.wilson_lo, r.wilson_hi),
            r.seed
        ));
    }
    out
}

fn report_cmd(args: ReportArgs) -> Result<(), CliError> {
    let dir = out_dir(args.dir);
    let (rows, skipped) = load_reports(&dir)?;
    for s in &skipped {
        eprintln!("skipped {s}");
    }
    if rows.is_empty() {
        return Err(CliError::Failed(format!("no reports found in {}", dir.display())));
    }
    print!("{}", render(&rows));
    let missing: Vec<String> = TABLE_ROWS
        .iter()
        .filter(|(p, m)| !rows.iter().any(|r| r.problem == *p && r.model == *m))
        .map(|(p, m)| format!("{p}/{m}"))
        .collect();
    if !missing.is_empty() {
        println!("missing rows: {}", missing.join(", "));
    }
    let csv_path = args.csv.unwrap_or_else(|| dir.join("table.csv"));
    write(&csv_path, &to_csv(&rows).map_err(|e| CliError::Usage(e.to_string()))?)?;
    println!("{}", csv_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
