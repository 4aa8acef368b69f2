//! Comparison strategies: round-robin placement on edge servers with
//! controllers at the most central switches. Routing is still optimized.

use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infra::{HostKind, Instance};
use crate::model::ModelIr;
use crate::routing::QueueEntry;
use crate::solvers::structured::Context;
use crate::solvers::{DeploymentSolution, SolveStatus, SolverConfig};

/// Distances closer than this are treated as equal when counting shortest
/// paths.
const TIE_EPS: f64 = 1e-12;

/// Weighted directed graph.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) {
        self.adj[u].push((v, weight));
    }

    pub fn add_undirected(&mut self, u: usize, v: usize, weight: f64) {
        self.add_edge(u, v, weight);
        self.add_edge(v, u, weight);
    }

    /// All hosts and switches, weighted by link latency.
    pub fn from_instance(inst: &Instance) -> Self {
        let mut g = Graph::new(inst.n_nodes());
        for l in &inst.links {
            g.add_edge(l.src, l.dst, l.latency_s);
        }
        g
    }

    /// Distances from `s`, shortest-path counts and predecessor lists, plus
    /// nodes in non-decreasing distance order.
    fn sssp(&self, s: usize) -> Sssp {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut sigma = vec![0.0; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        sigma[s] = 1.0;
        heap.push(QueueEntry { dist: 0.0, node: s });
        while let Some(QueueEntry { dist: d, node: u }) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            order.push(u);
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] - TIE_EPS {
                    dist[v] = nd;
                    sigma[v] = sigma[u];
                    preds[v] = vec![u];
                    heap.push(QueueEntry { dist: nd, node: v });
                } else if (nd - dist[v]).abs() <= TIE_EPS && !done[v] && u != v {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        Sssp {
            dist,
            sigma,
            preds,
            order,
        }
    }
}

struct Sssp {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
    order: Vec<usize>,
}

/// Shortest-path betweenness (Brandes). Every ordered pair contributes; the
/// result is halved so that on symmetric graphs each unordered pair counts
/// once.
pub fn betweenness_centrality(g: &Graph) -> Result<Vec<f64>> {
    let n = g.len();
    let mut score = vec![0.0; n];
    for s in 0..n {
        let sp = g.sssp(s);
        if sp.order.len() != n {
            return Err(Error::Disconnected);
        }
        let mut delta = vec![0.0; n];
        for &w in sp.order.iter().rev() {
            for &v in &sp.preds[w] {
                delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    Ok(score.into_iter().map(|x| x / 2.0).collect())
}

/// Inverse of the summed shortest-path distance to all other nodes.
pub fn closeness_centrality(g: &Graph) -> Result<Vec<f64>> {
    (0..g.len())
        .map(|s| {
            let sp = g.sssp(s);
            if sp.order.len() != g.len() {
                return Err(Error::Disconnected);
            }
            let total: f64 = sp.dist.iter().sum();
            Ok(if total > 0.0 { 1.0 / total } else { 0.0 })
        })
        .collect()
}

/// Host of every item (workflow-major order): items go to edge servers in
/// cyclic order, skipping servers without enough memory left.
pub fn round_robin_edge(inst: &Instance) -> Result<Vec<usize>> {
    let servers: Vec<usize> = (0..inst.n_hosts())
        .filter(|&h| inst.hosts[h].kind == HostKind::EdgeServer && inst.hosts[h].cpu_hz > 0.0)
        .collect();
    let mut left: Vec<u64> = inst.hosts.iter().map(|h| h.ram_bytes).collect();
    let mut next = 0usize;
    let mut placement = Vec::with_capacity(inst.n_items());
    for (w, wf) in inst.workflows.iter().enumerate() {
        for a in 0..wf.chain.len() {
            let demand = inst.service(w, a).ram_bytes;
            let pick = (0..servers.len())
                .map(|k| (next + k) % servers.len())
                .find(|&k| left[servers[k]] >= demand);
            let Some(k) = pick else {
                return Err(Error::CapacityExhausted {
                    workflow: inst.workflow_ids[w].clone(),
                    position: a,
                });
            };
            left[servers[k]] -= demand;
            placement.push(servers[k]);
            next = (k + 1) % servers.len();
        }
    }
    Ok(placement)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementRule {
    RoundRobinEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerRule {
    /// Highest betweenness centrality.
    Hbc,
    /// Highest closeness centrality.
    Hcc,
}

impl ControllerRule {
    pub fn label(self) -> &'static str {
        match self {
            ControllerRule::Hbc => "hbc",
            ControllerRule::Hcc => "hcc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineStrategy {
    pub placement: PlacementRule,
    pub controller_rule: ControllerRule,
    pub controllers: usize,
}

impl BaselineStrategy {
    pub fn new(controller_rule: ControllerRule, controllers: usize) -> Self {
        BaselineStrategy {
            placement: PlacementRule::RoundRobinEdge,
            controller_rule,
            controllers,
        }
    }

    pub fn name(&self) -> String {
        format!("round_robin_{}", self.controller_rule.label())
    }
}

/// The `k` switches with the highest score, ties to the smaller index.
pub fn top_switches(inst: &Instance, rule: ControllerRule, k: usize) -> Result<Vec<usize>> {
    let g = Graph::from_instance(inst);
    let scores = match rule {
        ControllerRule::Hbc => betweenness_centrality(&g)?,
        ControllerRule::Hcc => closeness_centrality(&g)?,
    };
    // Scores equal up to rounding noise count as ties.
    let scale = scores
        .iter()
        .fold(0.0f64, |m, s| m.max(s.abs()))
        .max(f64::MIN_POSITIVE);
    let key = |s: usize| (scores[inst.switch_node(s)] / scale * 1e9).round() as i64;
    let mut switches: Vec<usize> = (0..inst.n_switches()).collect();
    switches.sort_by_key(|&s| (std::cmp::Reverse(key(s)), s));
    switches.truncate(k);
    switches.sort_unstable();
    Ok(switches)
}

/// Fixes placement and controllers by `strategy` and routes every flow.
pub fn solve_baseline(
    model: &ModelIr,
    strategy: &BaselineStrategy,
    cfg: &SolverConfig,
) -> Result<DeploymentSolution> {
    let start = Instant::now();
    let inst = model.instance();
    if strategy.controllers == 0 || strategy.controllers > inst.max_controllers {
        return Err(Error::Config(format!(
            "baseline needs between 1 and {} controllers, got {}",
            inst.max_controllers, strategy.controllers
        )));
    }
    let name = strategy.name();
    let placement = round_robin_edge(inst)?;
    let controllers = top_switches(inst, strategy.controller_rule, strategy.controllers)?;
    let ctx = Context::new(model, cfg.k_paths);
    let routed = ctx.control_plan(&controllers).and_then(|plan| {
        let hop = ctx.hop_costs(&plan);
        ctx.route(&plan, &hop, &placement)
    });
    let wall = start.elapsed().as_secs_f64();
    Ok(match routed {
        None => DeploymentSolution::without_solution(model, SolveStatus::Infeasible, &name, wall),
        Some(r) => DeploymentSolution {
            status: SolveStatus::Feasible,
            objective_value: Some(r.cost),
            values: r.deployment.materialize(model),
            solver: name,
            wall_time_s: wall,
            lower_bound: None,
            scenario_fingerprint: model.fingerprint().to_string(),
        },
    })
}
