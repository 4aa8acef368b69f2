//! `dado sweep`: generate every scenario of a sweep, solve it with the
//! optimizer and both baselines, and write the result tables.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dado::baselines::{solve_baseline, BaselineStrategy, ControllerRule};
use dado::evaluator::{compare, response_time, ComparisonReport};
use dado::model::build_model;
use dado::scenarios::{
    enumerate_sweep, write_manifest, GeneratorConfig, Hardware, ManifestRow, SweepConfig,
    SweepEntry, TopologySize,
};
use dado::solvers::{DeploymentSolution, SolveStatus, SolverConfig};
use dado::Error;

use crate::{
    exit, run_solver, CliError, CliResult, RunManifest, RunResult, SolverKind, MANIFEST_FILE,
};

pub const RESULTS_FILE: &str = "results.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const RESPONSE_TIMES_FILE: &str = "response_times.csv";
pub const SCENARIO_MANIFEST_FILE: &str = "scenarios.csv";
pub const SCENARIO_DIR: &str = "scenarios";

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep configuration (TOML); the default sweep when absent.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bnb")]
    pub solver: SolverKind,
    /// Seconds per solve.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    /// Overrides the seed of the sweep configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub topology: TopologySize,
    pub controllers: u32,
    pub requests: u32,
    pub length: u32,
    pub mcycles: u32,
    pub hardware: Hardware,
    pub solver: String,
    pub objective_s: Option<f64>,
    pub status: String,
    pub scenario_id: String,
}

/// One row of `comparison.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario_id: String,
    pub baseline_name: String,
    pub dado_objective_s: Option<f64>,
    pub baseline_objective_s: Option<f64>,
    pub improvement_pct: Option<f64>,
    pub flagged: bool,
}

/// One row of `response_times.csv` (optimizer solutions only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTimeRow {
    pub scenario_id: String,
    pub workflow: String,
    pub execution_s: f64,
    pub network_latency_s: f64,
    pub control_latency_s: f64,
    pub total_s: f64,
}

/// Everything produced for one scenario.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOutcome {
    pub results: Vec<ResultRow>,
    pub comparisons: Vec<ComparisonRow>,
    pub response_times: Vec<ResponseTimeRow>,
    pub runs: Vec<RunResult>,
}

#[derive(Serialize)]
struct EffectiveConfig<'a> {
    sweep: &'a SweepConfig,
    generator: &'a GeneratorConfig,
    solver: &'a SolverConfig,
    solver_kind: &'a str,
}

const BASELINE_RULES: [ControllerRule; 2] = [ControllerRule::Hbc, ControllerRule::Hcc];

fn solver_label(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::Oracle => "oracle",
        SolverKind::Bnb => "bnb",
    }
}

fn row(entry: &SweepEntry, solver: &str, objective_s: Option<f64>, status: &str) -> ResultRow {
    let p = entry.point;
    ResultRow {
        topology: p.topology,
        controllers: p.controllers,
        requests: p.requests_per_device,
        length: p.functionality_length,
        mcycles: p.workload_mcycles,
        hardware: p.hardware,
        solver: solver.to_string(),
        objective_s,
        status: status.to_string(),
        scenario_id: entry.id(),
    }
}

fn record(out: &mut ScenarioOutcome, entry: &SweepEntry, file: &str, sol: &DeploymentSolution) {
    let objective = sol
        .status
        .has_solution()
        .then_some(sol.objective_value)
        .flatten();
    out.results
        .push(row(entry, &sol.solver, objective, sol.status.label()));
    out.runs.push(RunResult {
        scenario_id: entry.id(),
        scenario_file: file.to_string(),
        solver: sol.solver.clone(),
        status: sol.status.label().to_string(),
        objective_s: objective,
        wall_time_s: sol.wall_time_s,
    });
}

fn record_error(
    out: &mut ScenarioOutcome,
    entry: &SweepEntry,
    file: &str,
    solver: &str,
    err: &Error,
) {
    eprintln!("{}: {solver}: {err}", entry.id());
    out.results.push(row(entry, solver, None, "error"));
    out.runs.push(RunResult {
        scenario_id: entry.id(),
        scenario_file: file.to_string(),
        solver: solver.to_string(),
        status: "error".into(),
        objective_s: None,
        wall_time_s: 0.0,
    });
}

/// Solves one scenario with the optimizer and both baselines. Failures are
/// recorded in the rows and never abort the sweep.
pub fn solve_entry(
    entry: &SweepEntry,
    file: &str,
    kind: SolverKind,
    cfg: &SolverConfig,
) -> ScenarioOutcome {
    let mut out = ScenarioOutcome::default();
    let dado_name = solver_label(kind);
    let model = match build_model(&entry.scenario) {
        Ok(m) => m,
        Err(e) => {
            record_error(&mut out, entry, file, dado_name, &e);
            return out;
        }
    };
    let dado = match run_solver(&model, kind, cfg) {
        Ok(s) => {
            record(&mut out, entry, file, &s);
            Some(s)
        }
        Err(e) => {
            record_error(&mut out, entry, file, dado_name, &e);
            None
        }
    };
    if let Some(sol) = dado.as_ref().filter(|s| s.status.has_solution()) {
        match response_time(&model, sol) {
            Ok(report) => out
                .response_times
                .extend(report.per_workflow.into_iter().map(|w| ResponseTimeRow {
                    scenario_id: entry.id(),
                    workflow: w.workflow,
                    execution_s: w.execution_s,
                    network_latency_s: w.network_latency_s,
                    control_latency_s: w.control_latency_s,
                    total_s: w.total_s,
                })),
            Err(e) => eprintln!("{}: evaluator: {e}", entry.id()),
        }
    }

    let psi = model.instance().max_controllers;
    let mut baselines = Vec::new();
    for rule in BASELINE_RULES {
        let strategy = BaselineStrategy::new(rule, psi);
        let name = strategy.name();
        match solve_baseline(&model, &strategy, cfg) {
            Ok(s) => {
                record(&mut out, entry, file, &s);
                baselines.push((name, s));
            }
            Err(Error::CapacityExhausted { .. }) => {
                let s = DeploymentSolution::without_solution(
                    &model,
                    SolveStatus::Infeasible,
                    &name,
                    0.0,
                );
                record(&mut out, entry, file, &s);
                baselines.push((name, s));
            }
            Err(e) => record_error(&mut out, entry, file, &name, &e),
        }
    }
    if let Some(dado) = &dado {
        if let Ok(reports) = compare(dado, &baselines) {
            out.comparisons.extend(
                reports
                    .into_iter()
                    .map(|r: ComparisonReport| ComparisonRow {
                        scenario_id: entry.id(),
                        baseline_name: r.baseline_name,
                        dado_objective_s: r.dado_objective_s,
                        baseline_objective_s: r.baseline_objective_s,
                        improvement_pct: r.improvement_pct,
                        flagged: r.flagged,
                    }),
            );
        }
    }
    out
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for r in rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, argv: &[String]) -> CliResult<i32> {
    let generator = GeneratorConfig::from_env()?;
    let mut cfg = match &args.sweep {
        Some(path) => SweepConfig::load(path).map_err(|e| CliError {
            code: exit::INVALID,
            message: format!("{}: {e}", path.display()),
        })?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let solver_cfg = SolverConfig {
        time_limit_s: args.time_limit,
        seed: cfg.seed,
        ..SolverConfig::default()
    };
    solver_cfg.validate()?;

    let mut entries = enumerate_sweep(&cfg, &generator)?;
    // results are ordered by scenario id whatever the worker schedule
    entries.sort_by_key(|e| e.id());

    let scenario_dir = args.out_dir.join(SCENARIO_DIR);
    fs::create_dir_all(&scenario_dir)?;
    let mut manifest_rows = Vec::with_capacity(entries.len());
    for e in &entries {
        let file = format!("{SCENARIO_DIR}/{}.json", e.id());
        e.scenario.save(args.out_dir.join(&file))?;
        manifest_rows.push(ManifestRow::new(e, &file));
    }
    write_manifest(
        &manifest_rows,
        File::create(args.out_dir.join(SCENARIO_MANIFEST_FILE))?,
    )?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError {
        code: exit::INVALID,
        message: e.to_string(),
    })?;
    let outcomes: Vec<ScenarioOutcome> = pool.install(|| {
        entries
            .par_iter()
            .zip(&manifest_rows)
            .map(|(e, m)| {
                let out = solve_entry(e, &m.file, args.solver, &solver_cfg);
                eprintln!("{} done", e.id());
                out
            })
            .collect()
    });

    let mut manifest = RunManifest::new(
        argv,
        &EffectiveConfig {
            sweep: &cfg,
            generator: &generator,
            solver: &solver_cfg,
            solver_kind: solver_label(args.solver),
        },
        cfg.seed,
    );
    let (mut results, mut comparisons, mut times) = (Vec::new(), Vec::new(), Vec::new());
    for o in outcomes {
        results.extend(o.results);
        comparisons.extend(o.comparisons);
        times.extend(o.response_times);
        manifest.results.extend(o.runs);
    }
    write_rows(&args.out_dir.join(RESULTS_FILE), &results)?;
    write_rows(&args.out_dir.join(COMPARISON_FILE), &comparisons)?;
    write_rows(&args.out_dir.join(RESPONSE_TIMES_FILE), &times)?;
    manifest.write(args.out_dir.join(MANIFEST_FILE))?;

    println!("scenarios={} result_rows={}", entries.len(), results.len());
    if let Some(best) = comparisons
        .iter()
        .filter_map(|c| c.improvement_pct.map(|p| (p, c)))
        .max_by(|a, b| a.0.total_cmp(&b.0))
    {
        println!(
            "max improvement {:.2}% ({} vs {})",
            best.0, best.1.scenario_id, best.1.baseline_name
        );
    }
    Ok(exit::OK)
}
