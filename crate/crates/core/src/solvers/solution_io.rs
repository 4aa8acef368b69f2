//! `name=value` solution files.
//!
//! One assignment per line; `#` starts a comment line and blank lines are
//! skipped. Variables that do not appear are 0. The writer emits only
//! non-zero values and two header comments, `# status=<label>` and
//! `# solver=<name>`, which the importer honours when present. Every line,
//! including the last, ends with a newline; anything else is treated as a
//! truncated file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::evaluator::{check_feasibility, FeasibilityReport};
use serde::{Deserialize, Serialize};

use crate::model::{ControlTerm, ModelIr};
use crate::solvers::{DeploymentSolution, SolveStatus};

/// A solution read from disk together with its feasibility check.
#[derive(Debug, Clone)]
pub struct ImportedSolution {
    pub solution: DeploymentSolution,
    pub report: FeasibilityReport,
}

pub fn write_values_file(
    model: &ModelIr,
    solution: &DeploymentSolution,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# status={}", solution.status.label())?;
    writeln!(out, "# solver={}", solution.solver)?;
    for v in model.layout().ids() {
        let value = solution.values.get(v.index()).copied().unwrap_or(0.0);
        if value != 0.0 {
            writeln!(out, "{}={}", model.var_name(v), value)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Parsed file content: dense values plus header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuesFile {
    pub values: Vec<f64>,
    pub status: Option<SolveStatus>,
    pub solver: Option<String>,
}

pub fn read_values_file(model: &ModelIr, path: impl AsRef<Path>) -> Result<ValuesFile> {
    let path = path.as_ref();
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let content = std::fs::read(path)?;
    let inst = model.instance();
    let mut out = ValuesFile {
        values: vec![0.0; model.n_vars()],
        status: None,
        solver: None,
    };
    let content = String::from_utf8(content).map_err(|_| err(0, "not UTF-8".into()))?;
    let n_lines = content.lines().count();
    if !content.is_empty() && !content.ends_with('\n') {
        return Err(err(
            n_lines,
            "file is truncated (last line has no newline)".into(),
        ));
    }
    for (i, text) in content.lines().enumerate() {
        let line_no = i + 1;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some((k, v)) = comment.trim().split_once('=') {
                match k.trim() {
                    "status" => {
                        out.status = Some(match v.trim() {
                            "optimal" => SolveStatus::Optimal,
                            "feasible" => SolveStatus::Feasible,
                            "infeasible" => SolveStatus::Infeasible,
                            "time_limit" => SolveStatus::TimeLimit,
                            other => return Err(err(line_no, format!("unknown status `{other}`"))),
                        })
                    }
                    "solver" => out.solver = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let Some((name, value)) = text.split_once('=') else {
            return Err(err(line_no, format!("expected `name=value`, got `{text}`")));
        };
        let name = name.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("bad value for `{name}`")))?;
        if !value.is_finite() {
            return Err(err(line_no, format!("non-finite value for `{name}`")));
        }
        let id = model
            .layout()
            .parse_name(inst, name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        out.values[id.index()] = value;
    }
    Ok(out)
}

/// Reads a solution file, checks it against every row and recomputes the
/// objective. A point that violates the model is returned with status
/// `Infeasible` and the violated rows in the report.
pub fn import_solution(model: &ModelIr, path: impl AsRef<Path>) -> Result<ImportedSolution> {
    let start = Instant::now();
    let file = read_values_file(model, path)?;
    let mut solution = DeploymentSolution {
        status: SolveStatus::Feasible,
        objective_value: Some(model.objective_value(&file.values)),
        values: file.values,
        solver: file.solver.unwrap_or_else(|| "import".into()),
        wall_time_s: 0.0,
        lower_bound: None,
        scenario_fingerprint: model.fingerprint().to_string(),
    };
    let report = check_feasibility(model, &solution)?;
    solution.status = if !report.passes {
        SolveStatus::Infeasible
    } else {
        match file.status {
            Some(SolveStatus::Optimal) => SolveStatus::Optimal,
            _ => SolveStatus::Feasible,
        }
    };
    if solution.status == SolveStatus::Optimal {
        solution.lower_bound = solution.objective_value;
    }
    solution.wall_time_s = start.elapsed().as_secs_f64();
    Ok(ImportedSolution { solution, report })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedItem {
    pub workflow: String,
    pub position: usize,
    pub microservice: String,
    pub host: String,
}

/// JSON form of a [`DeploymentSolution`]: metadata, the decoded decisions
/// and the non-zero variables by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub status: SolveStatus,
    pub objective_s: Option<f64>,
    pub average_s: Option<f64>,
    pub lower_bound_s: Option<f64>,
    pub solver: String,
    pub wall_time_s: f64,
    pub scenario_fingerprint: String,
    pub control_term: ControlTerm,
    pub controllers: Vec<String>,
    /// Switch id to controller switch id.
    pub mapping: BTreeMap<String, String>,
    pub placement: Vec<PlacedItem>,
    pub assignment: BTreeMap<String, f64>,
}

impl SolutionRecord {
    pub fn new(model: &ModelIr, solution: &DeploymentSolution) -> Self {
        let inst = model.instance();
        let mut record = SolutionRecord {
            status: solution.status,
            objective_s: solution.objective_value,
            average_s: solution.average(inst.n_workflows()),
            lower_bound_s: solution.lower_bound,
            solver: solution.solver.clone(),
            wall_time_s: solution.wall_time_s,
            scenario_fingerprint: solution.scenario_fingerprint.clone(),
            control_term: model.options().control_term,
            controllers: Vec::new(),
            mapping: BTreeMap::new(),
            placement: Vec::new(),
            assignment: BTreeMap::new(),
        };
        if let Some(d) = solution.deployment(model) {
            record.controllers = d
                .controllers
                .iter()
                .map(|&c| inst.switch_ids[c].clone())
                .collect();
            record.mapping = d
                .mapping
                .iter()
                .enumerate()
                .map(|(s, &c)| (inst.switch_ids[s].clone(), inst.switch_ids[c].clone()))
                .collect();
            record.placement = d
                .placement
                .iter()
                .enumerate()
                .map(|(item, &h)| {
                    let (w, a) = inst.item_position(item);
                    PlacedItem {
                        workflow: inst.workflow_ids[w].clone(),
                        position: a,
                        microservice: inst.microservice_ids[inst.workflows[w].chain[a]].clone(),
                        host: inst.host_ids[h].clone(),
                    }
                })
                .collect();
            for v in model.layout().ids() {
                let value = solution.values[v.index()];
                if value != 0.0 {
                    record.assignment.insert(model.var_name(v), value);
                }
            }
        }
        record
    }

    /// Rebuilds the dense solution for `model`.
    pub fn to_solution(&self, model: &ModelIr) -> Result<DeploymentSolution> {
        if self.scenario_fingerprint != model.fingerprint() {
            return Err(Error::ScenarioMismatch);
        }
        let values = if self.status.has_solution() {
            let mut values = vec![0.0; model.n_vars()];
            for (name, &value) in &self.assignment {
                let id = model
                    .layout()
                    .parse_name(model.instance(), name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                values[id.index()] = value;
            }
            values
        } else {
            Vec::new()
        };
        Ok(DeploymentSolution {
            status: self.status,
            objective_value: self.objective_s,
            values,
            solver: self.solver.clone(),
            wall_time_s: self.wall_time_s,
            lower_bound: self.lower_bound_s,
            scenario_fingerprint: self.scenario_fingerprint.clone(),
        })
    }

    /// Metadata-only view, usable without building the model.
    pub fn summary(&self) -> DeploymentSolution {
        DeploymentSolution {
            status: self.status,
            objective_value: self.objective_s,
            values: Vec::new(),
            solver: self.solver.clone(),
            wall_time_s: self.wall_time_s,
            lower_bound: self.lower_bound_s,
            scenario_fingerprint: self.scenario_fingerprint.clone(),
        }
    }
}
