//! Solution backends: exhaustive oracle, structured branch-and-bound, and
//! file-based exchange with external MILP solvers.

mod bnb;
mod mps;
mod oracle;
mod solution_io;
pub(crate) mod structured;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Commodity, ModelIr, VarKind};

pub use bnb::solve_bnb;
pub use mps::{export_mps, read_mps, write_mps, MpsModel};
pub use oracle::{count_oracle_vars, solve_oracle};
pub use solution_io::{
    import_solution, read_values_file, write_values_file, ImportedSolution, PlacedItem,
    SolutionRecord, ValuesFile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub time_limit_s: f64,
    /// Relative optimality gap accepted by branch-and-bound.
    pub optimality_gap: f64,
    /// Maximum number of free placement and controller variables the oracle
    /// enumerates.
    pub oracle_var_limit: usize,
    pub seed: u64,
    /// Alternative paths tried per flow when a link overflows.
    pub k_paths: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit_s: 60.0,
            optimality_gap: 0.0,
            oracle_var_limit: 32,
            seed: 0,
            k_paths: 8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit_s > 0.0) {
            return Err(Error::Config("time_limit_s must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.optimality_gap) {
            return Err(Error::Config("optimality_gap must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Values of every model variable plus solve metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentSolution {
    pub status: SolveStatus,
    /// Objective in seconds (sum over workflows); `None` without a solution.
    pub objective_value: Option<f64>,
    /// Dense variable values, empty without a solution.
    pub values: Vec<f64>,
    pub solver: String,
    pub wall_time_s: f64,
    /// Proven lower bound on the optimum, when known.
    pub lower_bound: Option<f64>,
    pub scenario_fingerprint: String,
}

impl DeploymentSolution {
    pub fn without_solution(
        model: &ModelIr,
        status: SolveStatus,
        solver: &str,
        wall_time_s: f64,
    ) -> Self {
        DeploymentSolution {
            status,
            objective_value: None,
            values: Vec::new(),
            solver: solver.to_string(),
            wall_time_s,
            lower_bound: None,
            scenario_fingerprint: model.fingerprint().to_string(),
        }
    }

    /// Average response time per workflow.
    pub fn average(&self, n_workflows: usize) -> Option<f64> {
        self.objective_value.map(|v| v / n_workflows as f64)
    }

    /// Decision summary decoded from the values.
    pub fn deployment(&self, model: &ModelIr) -> Option<Deployment> {
        if self.values.len() != model.n_vars() {
            return None;
        }
        Some(Deployment::decode(model, &self.values))
    }
}

/// Concrete decisions: controller sites, switch mapping, microservice
/// placement and the links of every flow.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Deployment {
    /// Switch indices hosting a controller, ascending.
    pub controllers: Vec<usize>,
    /// Controller switch of every switch.
    pub mapping: Vec<usize>,
    /// Host of every item.
    pub placement: Vec<usize>,
    /// Control path of every switch (empty when co-located).
    pub control_paths: Vec<Vec<usize>>,
    /// Path carrying the input of every item from the previous host (the
    /// starter for the first item).
    pub request_paths: Vec<Vec<usize>>,
    /// Path carrying the final output of every workflow back to its starter.
    pub response_paths: Vec<Vec<usize>>,
}

impl Deployment {
    /// Host generating the input traffic of `item`.
    pub fn request_source(&self, model: &ModelIr, item: usize) -> usize {
        let inst = model.instance();
        let (w, a) = inst.item_position(item);
        if a == 0 {
            inst.workflows[w].starter
        } else {
            self.placement[item - 1]
        }
    }

    /// Full variable vector consistent with these decisions.
    pub fn materialize(&self, model: &ModelIr) -> Vec<f64> {
        let inst = model.instance();
        let layout = model.layout();
        let mut v = vec![0.0; model.n_vars()];
        let mut set = |kind: VarKind, value: f64| v[layout.id(kind).index()] = value;

        for (item, &h) in self.placement.iter().enumerate() {
            set(
                VarKind::Z {
                    host: h as u32,
                    item: item as u32,
                },
                1.0,
            );
        }
        for &c in &self.controllers {
            set(VarKind::X { switch: c as u32 }, 1.0);
        }
        for (s, &c) in self.mapping.iter().enumerate() {
            set(
                VarKind::Y {
                    switch: s as u32,
                    controller: c as u32,
                },
                1.0,
            );
        }
        for (s, path) in self.control_paths.iter().enumerate() {
            for &l in path {
                set(
                    VarKind::Cf {
                        link: l as u32,
                        switch: s as u32,
                    },
                    1.0,
                );
            }
        }
        let mut flows: Vec<(Commodity, &[usize])> = Vec::new();
        for (item, path) in self.request_paths.iter().enumerate() {
            let host = self.request_source(model, item) as u32;
            flows.push((
                Commodity::Request {
                    host,
                    item: item as u32,
                },
                path,
            ));
        }
        for (w, path) in self.response_paths.iter().enumerate() {
            let wf = &inst.workflows[w];
            let host = self.placement[inst.item(w, wf.chain.len() - 1)] as u32;
            flows.push((
                Commodity::Response {
                    host,
                    workflow: w as u32,
                },
                path,
            ));
        }
        for (c, path) in &flows {
            for &l in *path {
                v[layout.flow(*c, l as u32).index()] = 1.0;
            }
        }

        // Linearization products; only the host of the previous item has a
        // non-zero factor.
        for (w, wf) in inst.workflows.iter().enumerate() {
            for a in 1..wf.chain.len() {
                let hop = inst.hop(w, a) as u32;
                let h = self.placement[inst.item(w, a - 1)] as u32;
                let cur = self.placement[inst.item(w, a)] as u32;
                for i in 0..inst.n_hosts() as u32 {
                    let kind = if i == cur {
                        VarKind::ZDoublePrime {
                            host: h,
                            other: i,
                            hop,
                        }
                    } else {
                        VarKind::ZPrime {
                            host: h,
                            other: i,
                            hop,
                        }
                    };
                    v[layout.id(kind).index()] = 1.0;
                }
            }
        }

        if layout.has_control_aux() {
            let cl: Vec<f64> = self
                .control_paths
                .iter()
                .map(|p| p.iter().map(|&l| inst.links[l].latency_s).sum())
                .collect();
            for (s, &lat) in cl.iter().enumerate() {
                v[layout
                    .id(VarKind::ControlLatency { switch: s as u32 })
                    .index()] = lat;
            }
            for (c, path) in &flows {
                for &l in *path {
                    let head = inst.links[l].dst;
                    if inst.is_switch_node(head) {
                        let s = head - inst.n_hosts();
                        v[layout
                            .id(VarKind::HopControl {
                                commodity: *c,
                                link: l as u32,
                            })
                            .index()] = cl[s];
                    }
                }
            }
        }
        v
    }

    /// Reads decisions back from a value vector. Flow paths are recovered by
    /// walking the links with value 1 from each source; links belonging to
    /// circulations are ignored.
    pub fn decode(model: &ModelIr, values: &[f64]) -> Deployment {
        let inst = model.instance();
        let layout = model.layout();
        let on = |kind: VarKind| values[layout.id(kind).index()] > 0.5;
        let n_s = inst.n_switches();

        let controllers: Vec<usize> = (0..n_s)
            .filter(|&s| on(VarKind::X { switch: s as u32 }))
            .collect();
        let mapping: Vec<usize> = (0..n_s)
            .map(|s| {
                (0..n_s)
                    .find(|&c| {
                        on(VarKind::Y {
                            switch: s as u32,
                            controller: c as u32,
                        })
                    })
                    .unwrap_or(s)
            })
            .collect();
        let placement: Vec<usize> = (0..inst.n_items())
            .map(|item| {
                (0..inst.n_hosts())
                    .find(|&h| {
                        on(VarKind::Z {
                            host: h as u32,
                            item: item as u32,
                        })
                    })
                    .unwrap_or(0)
            })
            .collect();

        let walk = |from: usize, to: usize, used: &dyn Fn(usize) -> bool| -> Vec<usize> {
            let mut path = Vec::new();
            let mut node = from;
            let mut seen = std::collections::HashSet::from([from]);
            while node != to {
                match inst.out_links[node].iter().find(|&&l| used(l)) {
                    Some(&l) => {
                        path.push(l);
                        node = inst.links[l].dst;
                        if !seen.insert(node) {
                            break;
                        }
                    }
                    None => break,
                }
            }
            path
        };

        let control_paths = (0..n_s)
            .map(|s| {
                let used = |l: usize| {
                    on(VarKind::Cf {
                        link: l as u32,
                        switch: s as u32,
                    })
                };
                walk(inst.switch_node(s), inst.switch_node(mapping[s]), &used)
            })
            .collect();
        let mut d = Deployment {
            controllers,
            mapping,
            placement,
            control_paths,
            request_paths: Vec::new(),
            response_paths: Vec::new(),
        };
        d.request_paths = (0..inst.n_items())
            .map(|item| {
                let src = d.request_source(model, item);
                let c = Commodity::Request {
                    host: src as u32,
                    item: item as u32,
                };
                let used = |l: usize| values[layout.flow(c, l as u32).index()] > 0.5;
                walk(src, d.placement[item], &used)
            })
            .collect();
        d.response_paths = (0..inst.n_workflows())
            .map(|w| {
                let wf = &inst.workflows[w];
                let src = d.placement[inst.item(w, wf.chain.len() - 1)];
                let c = Commodity::Response {
                    host: src as u32,
                    workflow: w as u32,
                };
                let used = |l: usize| values[layout.flow(c, l as u32).index()] > 0.5;
                walk(src, wf.starter, &used)
            })
            .collect();
        d
    }
}
