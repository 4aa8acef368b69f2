//! Feasibility checking, response-time decomposition and comparison of
//! solutions. The response time is recomputed from the instance data and the
//! decision values; objective coefficients are not consulted.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infra::Scenario;
use crate::model::{build_model, Commodity, ControlTerm, Family, ModelIr, VarKind};
use crate::solvers::DeploymentSolution;

pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Violated rows kept verbatim in a report.
const MAX_LISTED_ROWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidual {
    pub family: String,
    pub rows: usize,
    pub max_residual: f64,
    pub violated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// One entry per family present in the model.
    pub families: Vec<FamilyResidual>,
    /// Worst violation of a variable bound or of integrality.
    pub max_bound_violation: f64,
    /// Names and residuals of violated rows (first ones only).
    pub violated_rows: Vec<(String, f64)>,
    pub passes: bool,
}

impl FeasibilityReport {
    pub fn residual(&self, family: Family) -> f64 {
        self.families
            .iter()
            .find(|f| f.family == family.tag())
            .map_or(0.0, |f| f.max_residual)
    }

    pub fn violated_families(&self) -> Vec<&str> {
        self.families
            .iter()
            .filter(|f| f.violated > 0)
            .map(|f| f.family.as_str())
            .collect()
    }

    fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .families
            .iter()
            .filter(|f| f.violated > 0)
            .map(|f| {
                format!(
                    "{}: {} rows, max {:e}",
                    f.family, f.violated, f.max_residual
                )
            })
            .collect();
        if self.max_bound_violation > FEASIBILITY_TOL {
            parts.push(format!("bounds: max {:e}", self.max_bound_violation));
        }
        parts.join("; ")
    }
}

/// Evaluates every row and bound of `model` at the solution's values.
pub fn check_feasibility(
    model: &ModelIr,
    solution: &DeploymentSolution,
) -> Result<FeasibilityReport> {
    let values = &solution.values;
    if values.len() != model.n_vars() {
        return Err(Error::MissingValues {
            expected: model.n_vars(),
            got: values.len(),
        });
    }
    let mut by_family: BTreeMap<Family, FamilyResidual> = BTreeMap::new();
    let mut violated_rows = Vec::new();
    for row in model.constraints() {
        let family = row.family();
        let entry = by_family.entry(family).or_insert_with(|| FamilyResidual {
            family: family.tag().to_string(),
            rows: 0,
            max_residual: 0.0,
            violated: 0,
        });
        let r = row.violation(values);
        entry.rows += 1;
        entry.max_residual = entry.max_residual.max(r);
        if r > FEASIBILITY_TOL {
            entry.violated += 1;
            if violated_rows.len() < MAX_LISTED_ROWS {
                violated_rows.push((row.key.to_string(), r));
            }
        }
    }
    let families: Vec<FamilyResidual> = by_family.into_values().collect();
    let max_bound_violation = model
        .layout()
        .ids()
        .map(|v| model.bound_violation(v, values[v.index()]))
        .fold(0.0, f64::max);
    let passes = max_bound_violation <= FEASIBILITY_TOL && families.iter().all(|f| f.violated == 0);
    Ok(FeasibilityReport {
        families,
        max_bound_violation,
        violated_rows,
        passes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowTime {
    pub workflow: String,
    pub execution_s: f64,
    pub network_latency_s: f64,
    pub control_latency_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTimeReport {
    pub per_workflow: Vec<WorkflowTime>,
    pub aggregate_sum_s: f64,
    pub aggregate_avg_s: f64,
}

impl ResponseTimeReport {
    /// One CSV row per workflow.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.per_workflow {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decomposes the response time of every workflow into execution, network
/// and control latency. Refuses solutions that violate the model.
pub fn response_time(model: &ModelIr, solution: &DeploymentSolution) -> Result<ResponseTimeReport> {
    if solution.scenario_fingerprint != model.fingerprint() {
        return Err(Error::ScenarioMismatch);
    }
    if !solution.status.has_solution() {
        return Err(Error::Infeasible(format!(
            "solution status is {}",
            solution.status.label()
        )));
    }
    let report = check_feasibility(model, solution)?;
    if !report.passes {
        return Err(Error::Infeasible(report.summary()));
    }

    let inst = model.instance();
    let layout = model.layout();
    let v = |kind: VarKind| solution.values[layout.id(kind).index()];
    let n_h = inst.n_hosts();

    // Control path latency of every switch, from the control flow variables.
    let control: Vec<f64> = (0..inst.n_switches())
        .map(|s| {
            (0..inst.n_links())
                .map(|l| {
                    v(VarKind::Cf {
                        link: l as u32,
                        switch: s as u32,
                    }) * inst.links[l].latency_s
                })
                .sum()
        })
        .collect();
    let literal_control: f64 = (0..inst.n_switches())
        .map(|s| (n_h * inst.in_links[inst.switch_node(s)].len()) as f64 * control[s])
        .sum();

    let mut per_workflow = Vec::with_capacity(inst.n_workflows());
    for (w, wf) in inst.workflows.iter().enumerate() {
        let mut execution = 0.0;
        let mut commodities = Vec::new();
        for a in 0..wf.chain.len() {
            let item = inst.item(w, a) as u32;
            let cycles = inst.service(w, a).workload_cycles;
            for h in 0..n_h {
                let z = v(VarKind::Z {
                    host: h as u32,
                    item,
                });
                if z != 0.0 {
                    execution += z * cycles / inst.hosts[h].cpu_hz;
                }
                commodities.push(Commodity::Request {
                    host: h as u32,
                    item,
                });
            }
        }
        for h in 0..n_h {
            commodities.push(Commodity::Response {
                host: h as u32,
                workflow: w as u32,
            });
        }
        let mut network = 0.0;
        let mut per_hop_control = 0.0;
        for &c in &commodities {
            for (l, link) in inst.links.iter().enumerate() {
                let f = solution.values[layout.flow(c, l as u32).index()];
                if f == 0.0 {
                    continue;
                }
                network += f * link.latency_s;
                if inst.is_switch_node(link.dst) {
                    per_hop_control += f * control[link.dst - n_h];
                }
            }
        }
        let control_latency = match model.options().control_term {
            ControlTerm::PerHop => per_hop_control,
            ControlTerm::Literal => literal_control,
        };
        per_workflow.push(WorkflowTime {
            workflow: inst.workflow_ids[w].clone(),
            execution_s: execution,
            network_latency_s: network,
            control_latency_s: control_latency,
            total_s: execution + network + control_latency,
        });
    }
    let aggregate_sum_s: f64 = per_workflow.iter().map(|t| t.total_s).sum();
    Ok(ResponseTimeReport {
        aggregate_avg_s: aggregate_sum_s / per_workflow.len() as f64,
        per_workflow,
        aggregate_sum_s,
    })
}

/// [`response_time`] for a solution of the default model of `scenario`.
pub fn response_time_for(
    scenario: &Scenario,
    solution: &DeploymentSolution,
) -> Result<ResponseTimeReport> {
    if solution.scenario_fingerprint != scenario.fingerprint() {
        return Err(Error::ScenarioMismatch);
    }
    let model = build_model(scenario)?;
    response_time(&model, solution)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline_name: String,
    pub dado_objective_s: Option<f64>,
    pub baseline_objective_s: Option<f64>,
    /// `100 * (baseline - dado) / baseline`; absent when either side has no
    /// solution or the baseline objective is not positive.
    pub improvement_pct: Option<f64>,
    /// Set when the baseline has no solution or beats DADO. The latter can
    /// only happen through a solver defect or a time limit.
    pub flagged: bool,
}

/// Relative slack below which a negative improvement is treated as a tie.
const IMPROVEMENT_TOL: f64 = 1e-9;

pub fn compare(
    dado: &DeploymentSolution,
    baselines: &[(String, DeploymentSolution)],
) -> Result<Vec<ComparisonReport>> {
    if baselines
        .iter()
        .any(|(_, b)| b.scenario_fingerprint != dado.scenario_fingerprint)
    {
        return Err(Error::ScenarioMismatch);
    }
    let dado_obj = dado
        .status
        .has_solution()
        .then_some(dado.objective_value)
        .flatten();
    Ok(baselines
        .iter()
        .map(|(name, b)| {
            let base_obj = b.status.has_solution().then_some(b.objective_value).flatten();
            let improvement_pct = match (dado_obj, base_obj) {
                (Some(d), Some(b)) if b > 0.0 => Some(100.0 * (b - d) / b),
                _ => None,
            };
            let beaten = matches!((dado_obj, base_obj), (Some(d), Some(b)) if d > b + IMPROVEMENT_TOL * b.abs().max(1.0));
            ComparisonReport {
                baseline_name: name.clone(),
                dado_objective_s: dado_obj,
                baseline_objective_s: base_obj,
                improvement_pct,
                flagged: base_obj.is_none() || beaten,
            }
        })
        .collect())
}

pub fn write_comparison_csv(reports: &[ComparisonReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
