//! Exhaustive reference solver for small models.
//!
//! Enumerates every placement, controller set and switch mapping, then every
//! combination of loopless paths for the control and application flows with
//! explicit link-load bookkeeping. Only admissible bounds are used for
//! pruning, so the result is the exact optimum of the model. Nothing here is
//! shared with the branch-and-bound backend.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::infra::Instance;
use crate::model::{ControlTerm, ModelIr};
use crate::solvers::{Deployment, DeploymentSolution, SolveStatus, SolverConfig};

/// Free binary decisions the oracle enumerates: unfixed placement variables
/// plus the controller and mapping variables.
pub fn count_oracle_vars(model: &ModelIr) -> usize {
    let inst = model.instance();
    let z_free = model.layout().count_z() - model.fixed_zero().len();
    z_free + inst.n_switches() + inst.n_switches() * inst.n_switches()
}

#[derive(Debug, Clone)]
struct SimplePath {
    links: Vec<usize>,
    latency: f64,
    /// Switches entered along the path, one entry per hop into a switch.
    entered: Vec<usize>,
}

struct PathCatalog {
    paths: HashMap<(usize, usize), Vec<SimplePath>>,
}

impl PathCatalog {
    fn build(inst: &Instance) -> Self {
        let mut paths = HashMap::new();
        for src in 0..inst.n_nodes() {
            let mut found: HashMap<usize, Vec<SimplePath>> = HashMap::new();
            let mut visited = vec![false; inst.n_nodes()];
            let mut stack = Vec::new();
            visited[src] = true;
            enumerate(inst, src, &mut visited, &mut stack, &mut found);
            for (dst, mut list) in found {
                list.sort_by(|a, b| {
                    a.latency
                        .total_cmp(&b.latency)
                        .then(a.links.len().cmp(&b.links.len()))
                        .then(a.links.cmp(&b.links))
                });
                paths.insert((src, dst), list);
            }
        }
        PathCatalog { paths }
    }

    fn between(&self, src: usize, dst: usize) -> &[SimplePath] {
        self.paths.get(&(src, dst)).map_or(&[], |v| v.as_slice())
    }
}

fn enumerate(
    inst: &Instance,
    node: usize,
    visited: &mut [bool],
    stack: &mut Vec<usize>,
    found: &mut HashMap<usize, Vec<SimplePath>>,
) {
    for &l in &inst.out_links[node] {
        let next = inst.links[l].dst;
        if visited[next] {
            continue;
        }
        stack.push(l);
        visited[next] = true;
        let latency = stack.iter().map(|&k| inst.links[k].latency_s).sum();
        let entered = stack
            .iter()
            .map(|&k| inst.links[k].dst)
            .filter(|&n| inst.is_switch_node(n))
            .map(|n| n - inst.n_hosts())
            .collect();
        found.entry(next).or_default().push(SimplePath {
            links: stack.clone(),
            latency,
            entered,
        });
        enumerate(inst, next, visited, stack, found);
        visited[next] = false;
        stack.pop();
    }
}

/// One application flow of a fixed placement.
#[derive(Debug, Clone, Copy)]
struct Flow {
    src: usize,
    dst: usize,
    bytes: f64,
}

struct Oracle<'a> {
    inst: &'a Instance,
    catalog: PathCatalog,
    control_term: ControlTerm,
    /// Objective weight of each switch's control latency in the literal form.
    literal_weight: Vec<f64>,
    best: f64,
    best_deployment: Option<Deployment>,
}

const FEAS_TOL: f64 = 1e-9;

impl<'a> Oracle<'a> {
    fn fits(&self, load: &[f64], link: usize, extra: f64) -> bool {
        let cap = self.inst.links[link].capacity_bps;
        load[link] + extra <= cap * (1.0 + FEAS_TOL) + FEAS_TOL
    }

    fn placements(&mut self) {
        let inst = self.inst;
        let n_items = inst.n_items();
        let mut placement = vec![0usize; n_items];
        let mut ram = inst.hosts.iter().map(|h| h.ram_bytes).collect::<Vec<_>>();
        self.place(0, &mut placement, &mut ram);
    }

    fn place(&mut self, item: usize, placement: &mut Vec<usize>, ram: &mut Vec<u64>) {
        let inst = self.inst;
        if item == inst.n_items() {
            self.with_placement(placement);
            return;
        }
        let (w, a) = inst.item_position(item);
        let need = inst.service(w, a).ram_bytes;
        for h in 0..inst.n_hosts() {
            if inst.hosts[h].cpu_hz > 0.0 && ram[h] >= need {
                ram[h] -= need;
                placement[item] = h;
                self.place(item + 1, placement, ram);
                ram[h] += need;
            }
        }
    }

    fn with_placement(&mut self, placement: &[usize]) {
        let inst = self.inst;
        let mut exec = 0.0;
        let mut flows = Vec::new();
        for (w, wf) in inst.workflows.iter().enumerate() {
            let mut prev = wf.starter;
            for a in 0..wf.chain.len() {
                let h = placement[inst.item(w, a)];
                let ms = inst.service(w, a);
                exec += ms.workload_cycles / inst.hosts[h].cpu_hz;
                flows.push(Flow {
                    src: prev,
                    dst: h,
                    bytes: ms.input_bytes as f64,
                });
                prev = h;
            }
        }
        // Responses after all requests, matching the split below.
        for (w, wf) in inst.workflows.iter().enumerate() {
            flows.push(Flow {
                src: placement[inst.item(w, wf.chain.len() - 1)],
                dst: wf.starter,
                bytes: inst.service(w, wf.chain.len() - 1).output_bytes as f64,
            });
        }
        // Latency-only bound over all flows.
        let mut lb = exec;
        for f in &flows {
            if f.src != f.dst {
                match self.catalog.between(f.src, f.dst).first() {
                    Some(p) => lb += p.latency,
                    None => return,
                }
            }
        }
        if lb >= self.best {
            return;
        }

        let n_s = inst.n_switches();
        for mask in 1u32..(1 << n_s) {
            if mask.count_ones() as usize > inst.max_controllers {
                continue;
            }
            let open: Vec<usize> = (0..n_s).filter(|s| mask & (1 << s) != 0).collect();
            let mut mapping = vec![0usize; n_s];
            self.mappings(0, &open, &mut mapping, placement, &flows, exec);
        }
    }

    fn mappings(
        &mut self,
        s: usize,
        open: &[usize],
        mapping: &mut Vec<usize>,
        placement: &[usize],
        flows: &[Flow],
        exec: f64,
    ) {
        if s == self.inst.n_switches() {
            let mut load = vec![0.0; self.inst.n_links()];
            let mut cl = vec![0.0; self.inst.n_switches()];
            let mut cpaths = vec![Vec::new(); self.inst.n_switches()];
            let decision = Partial {
                open,
                mapping,
                placement,
                flows,
                exec,
            };
            self.control_paths(&decision, 0, &mut load, &mut cl, &mut cpaths);
            return;
        }
        for &c in open {
            mapping[s] = c;
            self.mappings(s + 1, open, mapping, placement, flows, exec);
        }
    }

    /// Cheapest cost of a flow under the given control latencies.
    fn flow_cost(&self, p: &SimplePath, cl: &[f64]) -> f64 {
        match self.control_term {
            ControlTerm::PerHop => p.latency + p.entered.iter().map(|&s| cl[s]).sum::<f64>(),
            ControlTerm::Literal => p.latency,
        }
    }

    fn control_cost(&self, cl: &[f64]) -> f64 {
        match self.control_term {
            ControlTerm::PerHop => 0.0,
            ControlTerm::Literal => cl
                .iter()
                .zip(&self.literal_weight)
                .map(|(c, w)| c * w)
                .sum(),
        }
    }

    fn flows_bound(&self, flows: &[Flow], cl: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for f in flows {
            if f.src == f.dst {
                continue;
            }
            let best = self
                .catalog
                .between(f.src, f.dst)
                .iter()
                .map(|p| self.flow_cost(p, cl))
                .fold(f64::INFINITY, f64::min);
            if !best.is_finite() {
                return None;
            }
            total += best;
        }
        Some(total)
    }

    fn control_paths(
        &mut self,
        d: &Partial<'_>,
        s: usize,
        load: &mut Vec<f64>,
        cl: &mut Vec<f64>,
        cpaths: &mut Vec<Vec<usize>>,
    ) {
        let inst = self.inst;
        // Latencies of switches not chosen yet count as 0: admissible.
        let Some(fb) = self.flows_bound(d.flows, cl) else {
            return;
        };
        if d.exec + fb + self.control_cost(cl) >= self.best {
            return;
        }
        if s == inst.n_switches() {
            let mut app_paths = vec![Vec::new(); d.flows.len()];
            let base = d.exec + self.control_cost(cl);
            self.app_paths(d, 0, base, load, cl, cpaths, &mut app_paths);
            return;
        }
        if d.mapping[s] == s {
            self.control_paths(d, s + 1, load, cl, cpaths);
            return;
        }
        let omega = inst.control_packet_bytes as f64;
        let options: Vec<SimplePath> = self
            .catalog
            .between(inst.switch_node(s), inst.switch_node(d.mapping[s]))
            .to_vec();
        for p in options {
            if !p.links.iter().all(|&l| self.fits(load, l, omega)) {
                continue;
            }
            for &l in &p.links {
                load[l] += omega;
            }
            cl[s] = p.latency;
            cpaths[s] = p.links.clone();
            self.control_paths(d, s + 1, load, cl, cpaths);
            cpaths[s].clear();
            cl[s] = 0.0;
            for &l in &p.links {
                load[l] -= omega;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn app_paths(
        &mut self,
        d: &Partial<'_>,
        k: usize,
        acc: f64,
        load: &mut Vec<f64>,
        cl: &[f64],
        cpaths: &[Vec<usize>],
        chosen: &mut Vec<Vec<usize>>,
    ) {
        if k == d.flows.len() {
            if acc < self.best {
                self.best = acc;
                let n_items = self.inst.n_items();
                self.best_deployment = Some(Deployment {
                    controllers: d.open.to_vec(),
                    mapping: d.mapping.to_vec(),
                    placement: d.placement.to_vec(),
                    control_paths: cpaths.to_vec(),
                    request_paths: chosen[..n_items].to_vec(),
                    response_paths: chosen[n_items..].to_vec(),
                });
            }
            return;
        }
        let rest = match self.flows_bound(&d.flows[k + 1..], cl) {
            Some(r) => r,
            None => return,
        };
        let f = d.flows[k];
        if f.src == f.dst {
            self.app_paths(d, k + 1, acc, load, cl, cpaths, chosen);
            return;
        }
        let options: Vec<SimplePath> = self.catalog.between(f.src, f.dst).to_vec();
        for p in options {
            let cost = self.flow_cost(&p, cl);
            if acc + cost + rest >= self.best {
                continue;
            }
            if !p.links.iter().all(|&l| self.fits(load, l, f.bytes)) {
                continue;
            }
            for &l in &p.links {
                load[l] += f.bytes;
            }
            chosen[k] = p.links.clone();
            self.app_paths(d, k + 1, acc + cost, load, cl, cpaths, chosen);
            chosen[k].clear();
            for &l in &p.links {
                load[l] -= f.bytes;
            }
        }
    }
}

struct Partial<'a> {
    open: &'a [usize],
    mapping: &'a [usize],
    placement: &'a [usize],
    flows: &'a [Flow],
    exec: f64,
}

/// Exact optimum by enumeration. Refuses models with more than
/// `cfg.oracle_var_limit` free placement/controller variables.
pub fn solve_oracle(model: &ModelIr, cfg: &SolverConfig) -> Result<DeploymentSolution> {
    let count = count_oracle_vars(model);
    if count > cfg.oracle_var_limit {
        return Err(Error::VarLimitExceeded {
            count,
            limit: cfg.oracle_var_limit,
        });
    }
    let start = Instant::now();
    let inst: &Instance = model.instance();
    let weight = (inst.n_hosts() * inst.n_workflows()) as f64;
    let mut oracle = Oracle {
        inst,
        catalog: PathCatalog::build(inst),
        control_term: model.options().control_term,
        literal_weight: (0..inst.n_switches())
            .map(|s| weight * inst.in_links[inst.switch_node(s)].len() as f64)
            .collect(),
        best: f64::INFINITY,
        best_deployment: None,
    };
    oracle.placements();
    let wall = start.elapsed().as_secs_f64();
    Ok(match oracle.best_deployment {
        None => {
            DeploymentSolution::without_solution(model, SolveStatus::Infeasible, "oracle", wall)
        }
        Some(d) => DeploymentSolution {
            status: SolveStatus::Optimal,
            objective_value: Some(oracle.best),
            values: d.materialize(model),
            solver: "oracle".into(),
            wall_time_s: wall,
            lower_bound: Some(oracle.best),
            scenario_fingerprint: model.fingerprint().to_string(),
        },
    })
}
