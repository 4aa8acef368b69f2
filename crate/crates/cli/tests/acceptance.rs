//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit status if
//! any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use dado::baselines::{solve_baseline, BaselineStrategy, ControllerRule};
use dado::evaluator::{check_feasibility, response_time};
use dado::infra::{
    ControlPlaneConfig, Host, HostKind, Link, Microservice, Scenario, SwitchNode, Workflow,
};
use dado::model::{build_model, Family, ModelIr, RowKey, VarKind};
use dado::scenarios::{
    enumerate_sweep, random_micro, tiny, GeneratorConfig, MicroShape, SweepConfig, SweepMode,
    TopologySize,
};
use dado::solvers::{
    read_mps, solve_bnb, solve_oracle, write_mps, DeploymentSolution, SolveStatus, SolverConfig,
};
use dado_cli::sweep::{
    cmd_sweep, ComparisonRow, ResultRow, SweepArgs, COMPARISON_FILE, RESULTS_FILE,
};
use dado_cli::SolverKind;

/// Objective agreement between independent computations.
const OBJ_TOL: f64 = 1e-9;
/// Row residual accepted as zero.
const RESIDUAL_TOL: f64 = 1e-6;
const AGREEMENT_SEEDS: u64 = 50;
const AGREEMENT_BUDGET_S: f64 = 5.0;
const TINY_OBJECTIVE: f64 = 0.629;
const MAX_GAP: f64 = 0.01;
const SMALL_BUDGET_S: f64 = 60.0;
const MEDIUM_BUDGET_S: f64 = 300.0;
/// Time limit for the long-chain points checked for residuals.
const SWEEP_POINT_LIMIT_S: f64 = 5.0;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn objective(sol: &DeploymentSolution) -> Result<f64, String> {
    sol.objective_value
        .filter(|_| sol.status.has_solution())
        .ok_or_else(|| format!("{} returned {}", sol.solver, sol.status.label()))
}

fn bnb(model: &ModelIr, time_limit_s: f64) -> Result<DeploymentSolution, String> {
    let cfg = SolverConfig {
        time_limit_s,
        ..SolverConfig::default()
    };
    solve_bnb(model, &cfg).map_err(|e| e.to_string())
}

fn oracle(model: &ModelIr) -> Result<DeploymentSolution, String> {
    solve_oracle(model, &SolverConfig::default()).map_err(|e| e.to_string())
}

fn default_sweep() -> Result<Vec<dado::scenarios::SweepEntry>, String> {
    enumerate_sweep(&SweepConfig::default(), &GeneratorConfig::default()).map_err(|e| e.to_string())
}

fn run_sweep(
    cfg: &SweepConfig,
    dir: &Path,
) -> Result<(Vec<ResultRow>, Vec<ComparisonRow>), String> {
    let sweep_file = dir.join("sweep.toml");
    fs::write(&sweep_file, toml_of(cfg)).map_err(|e| e.to_string())?;
    let args = SweepArgs {
        sweep: Some(sweep_file),
        solver: SolverKind::Bnb,
        time_limit: SMALL_BUDGET_S,
        seed: None,
        out_dir: dir.to_path_buf(),
        jobs: Some(1),
    };
    cmd_sweep(&args, &["acceptance".to_string()]).map_err(|e| e.message)?;
    Ok((
        read_csv(&dir.join(RESULTS_FILE))?,
        read_csv(&dir.join(COMPARISON_FILE))?,
    ))
}

fn toml_of(cfg: &SweepConfig) -> String {
    let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
    let topo = cfg
        .topology
        .iter()
        .map(|t| format!("\"{}\"", t.label()))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "workload_mcycles = [{}]\ncontrollers = [{}]\nrequests_per_device = [{}]\nfunctionality_length = [{}]\ntopology = [{topo}]\nseed = {}\nmode = {}\n",
        list(&cfg.workload_mcycles),
        list(&cfg.controllers),
        list(&cfg.requests_per_device),
        list(&cfg.functionality_length),
        cfg.seed,
        serde_json::to_string(&cfg.mode).expect("mode serializes")
    )
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..AGREEMENT_SEEDS {
        let model =
            build_model(&random_micro(seed, MicroShape::default())).map_err(|e| e.to_string())?;
        let (o, b) = (oracle(&model)?, bnb(&model, SMALL_BUDGET_S)?);
        ensure(
            o.status == SolveStatus::Optimal && b.status == SolveStatus::Optimal,
            || {
                format!(
                    "seed {seed}: oracle {} bnb {}",
                    o.status.label(),
                    b.status.label()
                )
            },
        )?;
        let diff = (objective(&o)? - objective(&b)?).abs();
        ensure(diff <= OBJ_TOL, || {
            format!("seed {seed}: objectives differ by {diff:e}")
        })?;
        worst = worst.max(diff);
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < AGREEMENT_BUDGET_S, || {
        format!("took {elapsed:.2}s")
    })?;
    Ok(format!(
        "{AGREEMENT_SEEDS} seeds, max diff {worst:e}, {elapsed:.2}s"
    ))
}

/// Three computing hosts on one switch, two workflows of length 3.
fn linearization_scenario() -> Scenario {
    let mut links = Vec::new();
    let mut hosts = Vec::new();
    for h in 0..3 {
        let id = format!("h{h}");
        for (src, dst) in [
            (id.clone(), "sw0".to_string()),
            ("sw0".to_string(), id.clone()),
        ] {
            links.push(Link {
                src,
                dst,
                latency_s: 0.001,
                capacity_bps: 1e9,
            });
        }
        hosts.push(Host {
            id,
            cpu_hz: 1e9,
            ram_bytes: 1 << 30,
            attached_switch: "sw0".into(),
            kind: HostKind::EdgeServer,
        });
    }
    Scenario {
        schema: 1,
        hosts,
        switches: vec![SwitchNode {
            id: "sw0".into(),
            controller_capable: true,
        }],
        links,
        microservices: (0..3)
            .map(|m| Microservice {
                id: format!("m{m}"),
                workload_cycles: 1e8,
                input_bytes: 1000,
                output_bytes: 1000,
                ram_bytes: 1 << 20,
            })
            .collect(),
        workflows: vec![
            Workflow {
                id: "w0".into(),
                starter_host: "h0".into(),
                chain: vec!["m0".into(), "m1".into(), "m2".into()],
            },
            Workflow {
                id: "w1".into(),
                starter_host: "h2".into(),
                chain: vec!["m2".into(), "m0".into(), "m1".into()],
            },
        ],
        control: ControlPlaneConfig {
            max_controllers: 1,
            control_packet_bytes: 128,
        },
    }
}

fn linearization() -> Outcome {
    let model = build_model(&linearization_scenario()).map_err(|e| e.to_string())?;
    let inst = model.instance();
    let layout = model.layout();
    let mut quads = 0;
    let mut cases = 0;
    for w in 0..inst.n_workflows() {
        for a in 1..inst.workflows[w].chain.len() {
            for h in 0..inst.n_hosts() {
                for i in 0..inst.n_hosts() {
                    let rows: Vec<usize> = (0..model.n_rows())
                        .filter(|&r| {
                            matches!(model.row(r).key, RowKey::Linearization { host, other, w: rw, a: ra, .. }
                                if (host, other, rw, ra) == (h as u32, i as u32, w as u32, a as u32))
                        })
                        .collect();
                    ensure(rows.len() == 6, || {
                        format!("h{h} i{i} w{w} a{a}: {} rows", rows.len())
                    })?;
                    let prev = layout.id(VarKind::Z {
                        host: h as u32,
                        item: inst.item(w, a - 1) as u32,
                    });
                    let cur = layout.id(VarKind::Z {
                        host: i as u32,
                        item: inst.item(w, a) as u32,
                    });
                    let hop = inst.hop(w, a) as u32;
                    let zp = layout.id(VarKind::ZPrime {
                        host: h as u32,
                        other: i as u32,
                        hop,
                    });
                    let zpp = layout.id(VarKind::ZDoublePrime {
                        host: h as u32,
                        other: i as u32,
                        hop,
                    });
                    for (p, c) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                        let mut satisfying = Vec::new();
                        for (x, y) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                            let mut v = vec![0.0; model.n_vars()];
                            v[prev.index()] = p;
                            v[cur.index()] = c;
                            v[zp.index()] = x;
                            v[zpp.index()] = y;
                            if rows.iter().all(|&r| model.row(r).violation(&v) <= 0.0) {
                                satisfying.push((x, y));
                            }
                        }
                        let expected = vec![(p * (1.0 - c), p * c)];
                        ensure(satisfying == expected, || {
                            format!("h{h} i{i} w{w} a{a} inputs ({p},{c}): {satisfying:?}")
                        })?;
                        cases += 1;
                    }
                    quads += 1;
                }
            }
        }
    }
    Ok(format!(
        "{quads} quadruples, {cases} input cases, 0 failures"
    ))
}

fn flow_residual(model: &ModelIr, sol: &DeploymentSolution) -> Result<f64, String> {
    let report = check_feasibility(model, sol).map_err(|e| e.to_string())?;
    Ok([Family::Eq7, Family::Eq8, Family::Eq15, Family::Eq16]
        .into_iter()
        .map(|f| report.residual(f))
        .fold(0.0, f64::max))
}

fn flow_conservation() -> Outcome {
    // the default sweep plus the small one-at-a-time points, whose longer
    // chains populate the eq15 rows
    let mut entries = default_sweep()?;
    let small = SweepConfig {
        topology: vec![TopologySize::Small],
        mode: SweepMode::OneAtATime,
        ..SweepConfig::full_table()
    };
    entries
        .extend(enumerate_sweep(&small, &GeneratorConfig::default()).map_err(|e| e.to_string())?);
    let mut solved = 0;
    let mut worst: f64 = 0.0;
    for e in &entries {
        let model = build_model(&e.scenario).map_err(|e| e.to_string())?;
        let sol = bnb(&model, SWEEP_POINT_LIMIT_S)?;
        if !sol.status.has_solution() {
            continue;
        }
        let r = flow_residual(&model, &sol)?;
        ensure(r <= RESIDUAL_TOL, || format!("{}: residual {r:e}", e.id()))?;
        for rule in [ControllerRule::Hbc, ControllerRule::Hcc] {
            let strategy = BaselineStrategy::new(rule, model.instance().max_controllers);
            if let Ok(b) = solve_baseline(&model, &strategy, &SolverConfig::default()) {
                let r = flow_residual(&model, &b)?;
                ensure(r <= RESIDUAL_TOL, || {
                    format!("{} {}: residual {r:e}", e.id(), b.solver)
                })?;
                worst = worst.max(r);
                solved += 1;
            }
        }
        worst = worst.max(r);
        solved += 1;
    }
    Ok(format!(
        "{solved} solutions over {} scenarios, max residual {worst:e}",
        entries.len()
    ))
}

fn dominance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (results, comparisons) = run_sweep(&SweepConfig::default(), dir.path())?;
    ensure(!comparisons.is_empty(), || "empty comparison CSV".into())?;
    let mut strict = 0;
    let mut best: f64 = 0.0;
    for c in &comparisons {
        let (Some(d), Some(b)) = (c.dado_objective_s, c.baseline_objective_s) else {
            ensure(c.flagged, || {
                format!(
                    "{} {}: missing objective not flagged",
                    c.scenario_id, c.baseline_name
                )
            })?;
            continue;
        };
        ensure(d <= b + OBJ_TOL * b.abs().max(1.0), || {
            format!(
                "{} {}: dado {d} > baseline {b}",
                c.scenario_id, c.baseline_name
            )
        })?;
        let pct = c.improvement_pct.ok_or_else(|| {
            format!(
                "{} {}: no improvement reported",
                c.scenario_id, c.baseline_name
            )
        })?;
        ensure((pct - 100.0 * (b - d) / b).abs() <= 1e-9, || {
            format!("{}: wrong percentage", c.scenario_id)
        })?;
        if d < b - OBJ_TOL * b.abs().max(1.0) {
            strict += 1;
        }
        best = best.max(pct);
    }
    ensure(strict >= 1, || "DADO never strictly better".into())?;
    Ok(format!(
        "{} result rows, {} comparisons, {strict} strictly better, max improvement {best:.3}%",
        results.len(),
        comparisons.len()
    ))
}

fn monotonicity() -> Outcome {
    let cfg = SweepConfig {
        topology: vec![TopologySize::Small],
        controllers: vec![1, 2, 3, 4],
        mode: SweepMode::FullProduct,
        ..SweepConfig::default()
    };
    let mut objectives = Vec::new();
    for e in enumerate_sweep(&cfg, &GeneratorConfig::default()).map_err(|e| e.to_string())? {
        let sol = bnb(
            &build_model(&e.scenario).map_err(|e| e.to_string())?,
            SMALL_BUDGET_S,
        )?;
        ensure(sol.status == SolveStatus::Optimal, || {
            format!("{}: {}", e.id(), sol.status.label())
        })?;
        objectives.push(objective(&sol)?);
    }
    ensure(objectives.len() == 4, || {
        format!("{} points", objectives.len())
    })?;
    ensure(
        objectives.windows(2).all(|p| p[1] <= p[0] + OBJ_TOL),
        || format!("{objectives:?}"),
    )?;
    Ok(format!("psi 1..4: {objectives:?}"))
}

fn infeasibility() -> Outcome {
    // two 600 MiB services against one 1 GiB server
    let mut s = tiny();
    s.microservices[0].ram_bytes = 600 << 20;
    let mut second = s.workflows[0].clone();
    second.id = "w1".into();
    s.workflows.push(second);
    let model = build_model(&s).map_err(|e| e.to_string())?;
    for sol in [oracle(&model)?, bnb(&model, SMALL_BUDGET_S)?] {
        ensure(sol.status == SolveStatus::Infeasible, || {
            format!("{}: {}", sol.solver, sol.status.label())
        })?;
    }

    // 40 workflows of six 64 MiB services need 15 GiB; the servers hold 10 GiB
    let cfg = SweepConfig {
        topology: vec![TopologySize::Small],
        requests_per_device: vec![4],
        functionality_length: vec![6],
        mode: SweepMode::FullProduct,
        ..SweepConfig::default()
    };
    let entry = &enumerate_sweep(&cfg, &GeneratorConfig::default()).map_err(|e| e.to_string())?[0];
    let demand: u64 = entry
        .scenario
        .workflows
        .iter()
        .flat_map(|w| &w.chain)
        .map(|m| {
            entry
                .scenario
                .microservices
                .iter()
                .find(|x| &x.id == m)
                .unwrap()
                .ram_bytes
        })
        .sum();
    let supply: u64 = entry.scenario.hosts.iter().map(|h| h.ram_bytes).sum();
    ensure(demand > supply, || {
        format!("demand {demand} <= supply {supply}")
    })?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (results, _) = run_sweep(&cfg, dir.path())?;
    ensure(!results.is_empty(), || "no result rows".into())?;
    for r in &results {
        ensure(r.status == "infeasible" && r.objective_s.is_none(), || {
            format!("{} {}: {}", r.scenario_id, r.solver, r.status)
        })?;
    }
    Ok(format!(
        "oracle and bnb infeasible; {} sweep rows marked infeasible",
        results.len()
    ))
}

fn evaluator_consistency() -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let micro = (0..20u64).map(|seed| random_micro(seed, MicroShape::default()));
    let sweep = default_sweep()?.into_iter().map(|e| e.scenario);
    for scenario in micro.chain(sweep) {
        let model = build_model(&scenario).map_err(|e| e.to_string())?;
        let mut sols = vec![bnb(&model, SMALL_BUDGET_S)?];
        if dado::solvers::count_oracle_vars(&model) <= SolverConfig::default().oracle_var_limit {
            sols.push(oracle(&model)?);
        }
        for sol in sols.iter().filter(|s| s.status.has_solution()) {
            let report = response_time(&model, sol).map_err(|e| e.to_string())?;
            let diff = (report.aggregate_sum_s - objective(sol)?).abs();
            ensure(diff <= OBJ_TOL, || {
                format!("{}: sum differs by {diff:e}", sol.solver)
            })?;
            let n = model.instance().n_workflows() as f64;
            ensure(
                (report.aggregate_avg_s - report.aggregate_sum_s / n).abs() <= OBJ_TOL,
                || "average is not sum/|W|".into(),
            )?;
            worst = worst.max(diff);
            checked += 1;
        }
    }
    Ok(format!("{checked} solutions, max diff {worst:e}"))
}

fn tiny_ground_truth() -> Outcome {
    let model = build_model(&tiny()).map_err(|e| e.to_string())?;
    let o = objective(&oracle(&model)?)?;
    let b_sol = bnb(&model, SMALL_BUDGET_S)?;
    let b = objective(&b_sol)?;
    let e = response_time(&model, &b_sol)
        .map_err(|e| e.to_string())?
        .aggregate_sum_s;
    for (who, v) in [("oracle", o), ("bnb", b), ("evaluator", e)] {
        ensure((v - TINY_OBJECTIVE).abs() <= OBJ_TOL, || {
            format!("{who}: {v}")
        })?;
    }
    Ok(format!("oracle {o}, bnb {b}, evaluator {e}"))
}

fn performance() -> Outcome {
    let mut parts = Vec::new();
    for (size, budget) in [
        (TopologySize::Small, SMALL_BUDGET_S),
        (TopologySize::Medium, MEDIUM_BUDGET_S),
    ] {
        let cfg = SweepConfig {
            topology: vec![size],
            ..SweepConfig::default()
        };
        let entry =
            &enumerate_sweep(&cfg, &GeneratorConfig::default()).map_err(|e| e.to_string())?[0];
        let start = Instant::now();
        let model = build_model(&entry.scenario).map_err(|e| e.to_string())?;
        let sol = bnb(&model, budget)?;
        let elapsed = start.elapsed().as_secs_f64();
        let obj = objective(&sol)?;
        let gap = sol
            .lower_bound
            .map_or(f64::INFINITY, |lb| (obj - lb) / obj.abs().max(1e-12));
        let ok = match size {
            TopologySize::Small => sol.status == SolveStatus::Optimal || gap <= MAX_GAP,
            _ => true,
        };
        ensure(ok && elapsed <= budget, || {
            format!(
                "{}: {} gap {gap} in {elapsed:.2}s",
                entry.id(),
                sol.status.label()
            )
        })?;
        parts.push(format!(
            "{} {} gap {gap:.2e} in {elapsed:.2}s",
            size.label(),
            sol.status.label()
        ));
    }
    Ok(parts.join("; "))
}

fn mps_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = SweepConfig {
        topology: vec![TopologySize::Small],
        functionality_length: vec![2],
        mode: SweepMode::FullProduct,
        ..SweepConfig::default()
    };
    let mut scenarios = vec![tiny(), random_micro(3, MicroShape::default())];
    scenarios.extend(
        enumerate_sweep(&cfg, &GeneratorConfig::default())
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|e| e.scenario),
    );
    let mut families = 0;
    for (k, s) in scenarios.iter().enumerate() {
        let model = build_model(s).map_err(|e| e.to_string())?;
        let mut first = Vec::new();
        let mut second = Vec::new();
        write_mps(&model, &mut first).map_err(|e| e.to_string())?;
        write_mps(&model, &mut second).map_err(|e| e.to_string())?;
        ensure(first == second, || format!("scenario {k}: exports differ"))?;
        let path = dir.path().join(format!("m{k}.mps"));
        fs::write(&path, &first).map_err(|e| e.to_string())?;
        let parsed = read_mps(&path).map_err(|e| e.to_string())?;
        ensure(parsed.columns.len() == model.n_vars(), || {
            format!("scenario {k}: column count")
        })?;
        let expected: Vec<(Family, usize)> = model.family_counts();
        let got: Vec<(Family, usize)> = parsed.family_counts().into_iter().collect();
        ensure(got == expected, || {
            format!("scenario {k}: {got:?} vs {expected:?}")
        })?;
        families = families.max(got.len());
    }
    Ok(format!(
        "{} models, up to {families} families each",
        scenarios.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("oracle agreement", oracle_agreement),
        ("linearization", linearization),
        ("flow conservation", flow_conservation),
        ("restriction dominance", dominance),
        ("controller monotonicity", monotonicity),
        ("infeasibility detection", infeasibility),
        ("evaluator consistency", evaluator_consistency),
        ("tiny instance", tiny_ground_truth),
        ("desk-scale performance", performance),
        ("mps round trip", mps_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
