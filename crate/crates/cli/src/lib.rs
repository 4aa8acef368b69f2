//! Front end for the `dado` binary: argument parsing, the five subcommands
//! and the files they write.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dado::baselines::{solve_baseline, BaselineStrategy, ControllerRule};
use dado::evaluator::{compare, response_time, write_comparison_csv};
use dado::model::{build_model, ModelIr};
use dado::solvers::{
    export_mps, solve_bnb, solve_oracle, DeploymentSolution, SolutionRecord, SolveStatus,
    SolverConfig,
};
use dado::{Error, Scenario};

pub mod sweep;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const TIME_LIMIT: i32 = 3;
}

pub const SOLUTION_FILE: &str = "solution.json";
pub const RESPONSE_TIME_FILE: &str = "response_time.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "dado",
    version,
    about = "Joint placement, controller selection and routing for edge workflows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario.
    Solve(SolveArgs),
    /// Evaluate a round-robin baseline on one scenario.
    Baseline(BaselineArgs),
    /// Generate and solve a parameter sweep.
    Sweep(sweep::SweepArgs),
    /// Write the model of a scenario as MPS.
    Export(ExportArgs),
    /// Compare a solution against baseline solutions of the same scenario.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Oracle,
    Bnb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Hbc,
    Hcc,
}

impl From<BaselineKind> for ControllerRule {
    fn from(k: BaselineKind) -> Self {
        match k {
            BaselineKind::Hbc => ControllerRule::Hbc,
            BaselineKind::Hcc => ControllerRule::Hcc,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "bnb")]
    pub solver: SolverKind,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Also write the model to this MPS file.
    #[arg(long)]
    pub export_mps: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum)]
    pub baseline: BaselineKind,
    /// Defaults to the scenario's controller budget.
    #[arg(long)]
    pub controllers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub export_mps: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Solution JSON of the optimizer.
    #[arg(long)]
    pub dado: PathBuf,
    /// Solution JSON files of the baselines.
    #[arg(long, num_args = 1.., required = true)]
    pub baselines: Vec<PathBuf>,
    /// Comparison CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: exit::INVALID,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    /// SHA-256 of the effective configuration.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub results: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario_id: String,
    pub scenario_file: String,
    pub solver: String,
    pub status: String,
    pub objective_s: Option<f64>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(argv: &[String], config: &impl Serialize, seed: u64) -> Self {
        RunManifest {
            command_line: argv.to_vec(),
            config_hash: config_hash(config),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            results: Vec::new(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> CliResult<()> {
        write_json(path, self)
    }
}

pub fn config_hash(config: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    hex::encode(Sha256::digest(bytes))
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Exit code for a finished solve.
pub fn status_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal | SolveStatus::Feasible => exit::OK,
        SolveStatus::Infeasible => exit::INFEASIBLE,
        SolveStatus::TimeLimit => exit::TIME_LIMIT,
    }
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let scenario = Scenario::load(path).map_err(|e| CliError {
        code: exit::INVALID,
        message: format!("{}: {e}", path.display()),
    })?;
    let report = scenario.validate();
    if !report.is_valid() {
        return Err(CliError {
            code: exit::INVALID,
            message: format!("{}: invalid scenario\n{report}", path.display()),
        });
    }
    Ok(scenario)
}

pub fn run_solver(
    model: &ModelIr,
    kind: SolverKind,
    cfg: &SolverConfig,
) -> dado::Result<DeploymentSolution> {
    match kind {
        SolverKind::Oracle => solve_oracle(model, cfg),
        SolverKind::Bnb => solve_bnb(model, cfg),
    }
}

/// Writes `solution.json`, plus `response_time.csv` when there is a point to
/// evaluate.
pub fn write_solution(
    model: &ModelIr,
    solution: &DeploymentSolution,
    out_dir: &Path,
) -> CliResult<()> {
    write_json(
        out_dir.join(SOLUTION_FILE),
        &SolutionRecord::new(model, solution),
    )?;
    if solution.status.has_solution() {
        let report = response_time(model, solution)?;
        report.write_csv(File::create(out_dir.join(RESPONSE_TIME_FILE))?)?;
    }
    Ok(())
}

fn summary_line(solution: &DeploymentSolution) -> String {
    match solution.objective_value {
        Some(obj) => format!(
            "status={} objective_s={obj} solver={} wall_time_s={:.3}",
            solution.status.label(),
            solution.solver,
            solution.wall_time_s
        ),
        None => format!(
            "status={} solver={} wall_time_s={:.3}",
            solution.status.label(),
            solution.solver,
            solution.wall_time_s
        ),
    }
}

fn single_result(path: &Path, scenario: &Scenario, solution: &DeploymentSolution) -> RunResult {
    RunResult {
        scenario_id: scenario.fingerprint(),
        scenario_file: path.display().to_string(),
        solver: solution.solver.clone(),
        status: solution.status.label().to_string(),
        objective_s: solution.objective_value,
        wall_time_s: solution.wall_time_s,
    }
}

pub fn cmd_solve(args: &SolveArgs, argv: &[String]) -> CliResult<i32> {
    let scenario = load_scenario(&args.scenario)?;
    let cfg = SolverConfig {
        time_limit_s: args.time_limit,
        seed: args.seed,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let model = build_model(&scenario)?;
    fs::create_dir_all(&args.out_dir)?;
    if let Some(path) = &args.export_mps {
        export_mps(&model, path)?;
    }
    let solution = run_solver(&model, args.solver, &cfg)?;
    write_solution(&model, &solution, &args.out_dir)?;

    let mut manifest = RunManifest::new(argv, &(&cfg, scenario.fingerprint()), args.seed);
    manifest
        .results
        .push(single_result(&args.scenario, &scenario, &solution));
    manifest.write(args.out_dir.join(MANIFEST_FILE))?;
    println!("{}", summary_line(&solution));
    Ok(status_code(solution.status))
}

pub fn cmd_baseline(args: &BaselineArgs, argv: &[String]) -> CliResult<i32> {
    let scenario = load_scenario(&args.scenario)?;
    let model = build_model(&scenario)?;
    let controllers = args.controllers.unwrap_or(model.instance().max_controllers);
    let strategy = BaselineStrategy::new(args.baseline.into(), controllers);
    let cfg = SolverConfig {
        seed: args.seed,
        ..SolverConfig::default()
    };
    fs::create_dir_all(&args.out_dir)?;
    let solution = match solve_baseline(&model, &strategy, &cfg) {
        Ok(s) => s,
        // out of edge-server memory: reported like any infeasible point
        Err(e @ Error::CapacityExhausted { .. }) => {
            eprintln!("{e}");
            DeploymentSolution::without_solution(
                &model,
                SolveStatus::Infeasible,
                &strategy.name(),
                0.0,
            )
        }
        Err(e) => return Err(e.into()),
    };
    write_solution(&model, &solution, &args.out_dir)?;
    let mut manifest = RunManifest::new(argv, &(&strategy, scenario.fingerprint()), args.seed);
    manifest
        .results
        .push(single_result(&args.scenario, &scenario, &solution));
    manifest.write(args.out_dir.join(MANIFEST_FILE))?;
    println!("{}", summary_line(&solution));
    Ok(status_code(solution.status))
}

pub fn cmd_export(args: &ExportArgs) -> CliResult<i32> {
    let scenario = load_scenario(&args.scenario)?;
    let model = build_model(&scenario)?;
    if let Some(dir) = args
        .export_mps
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        fs::create_dir_all(dir)?;
    }
    export_mps(&model, &args.export_mps)?;
    println!("variables={} rows={}", model.n_vars(), model.n_rows());
    for (family, count) in model.family_counts() {
        println!("{family} {count}");
    }
    Ok(exit::OK)
}

fn read_record(path: &Path) -> CliResult<SolutionRecord> {
    let text = fs::read_to_string(path).map_err(|e| CliError {
        code: exit::INVALID,
        message: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError {
        code: exit::INVALID,
        message: format!("{}: {e}", path.display()),
    })
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<i32> {
    let dado = read_record(&args.dado)?.summary();
    let baselines = args
        .baselines
        .iter()
        .map(|p| read_record(p).map(|r| (r.solver.clone(), r.summary())))
        .collect::<CliResult<Vec<_>>>()?;
    let reports = compare(&dado, &baselines)?;
    match &args.out {
        Some(path) => write_comparison_csv(&reports, File::create(path)?)?,
        None => write_comparison_csv(&reports, std::io::stdout().lock())?,
    }
    if let Some(best) = reports
        .iter()
        .filter_map(|r| r.improvement_pct.map(|p| (p, &r.baseline_name)))
        .max_by(|a, b| a.0.total_cmp(&b.0))
    {
        eprintln!("max improvement {:.2}% over {}", best.0, best.1);
    }
    Ok(exit::OK)
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: &Cli, argv: &[String]) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, argv),
        Command::Baseline(a) => cmd_baseline(a, argv),
        Command::Sweep(a) => sweep::cmd_sweep(a, argv),
        Command::Export(a) => cmd_export(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
