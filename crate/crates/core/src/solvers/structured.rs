//! Decomposition used by branch-and-bound and the baselines: for a fixed set
//! of controllers every switch maps to its latency-nearest controller, and
//! for a fixed placement every flow takes its cheapest path under link
//! weights that include the control latency of the switch being entered.

use crate::infra::Instance;
use crate::model::{ControlTerm, ModelIr};
use crate::routing::{dijkstra, k_shortest_paths, path_cost, PathTree};
use crate::solvers::Deployment;

const CAPACITY_TOL: f64 = 1e-9;

pub(crate) struct Context<'a> {
    pub inst: &'a Instance,
    pub control_term: ControlTerm,
    pub k_paths: usize,
    /// Latency-shortest-path tree from every switch.
    switch_trees: Vec<PathTree>,
}

#[derive(Debug, Clone)]
pub(crate) struct ControlPlan {
    pub controllers: Vec<usize>,
    pub mapping: Vec<usize>,
    pub latency: Vec<f64>,
    pub paths: Vec<Vec<usize>>,
    /// Objective contribution independent of the placement (literal form).
    pub fixed_cost: f64,
}

pub(crate) struct HopCosts {
    pub weights: Vec<f64>,
    /// Tree rooted at every host.
    pub trees: Vec<PathTree>,
}

impl HopCosts {
    /// Cost of moving data from host `u` to host `v`.
    pub fn cost(&self, u: usize, v: usize) -> f64 {
        if u == v {
            0.0
        } else {
            self.trees[u].dist[v]
        }
    }
}

/// Outcome of routing a complete placement.
#[derive(Debug, Clone)]
pub(crate) struct Routed {
    pub deployment: Deployment,
    pub cost: f64,
    /// Capacity forced at least one flow off its cheapest path.
    pub repaired: bool,
}

impl<'a> Context<'a> {
    pub fn new(model: &'a ModelIr, k_paths: usize) -> Self {
        let inst: &Instance = model.instance();
        let latency: Vec<f64> = inst.links.iter().map(|l| l.latency_s).collect();
        let switch_trees = (0..inst.n_switches())
            .map(|s| dijkstra(inst, &latency, inst.switch_node(s)))
            .collect();
        Context {
            inst,
            control_term: model.options().control_term,
            k_paths,
            switch_trees,
        }
    }

    /// Maps every switch to its nearest open controller (smallest index on
    /// ties). `None` if some switch cannot reach any controller.
    pub fn control_plan(&self, controllers: &[usize]) -> Option<ControlPlan> {
        let inst = self.inst;
        let n_s = inst.n_switches();
        let mut mapping = Vec::with_capacity(n_s);
        let mut latency = Vec::with_capacity(n_s);
        let mut paths = Vec::with_capacity(n_s);
        for s in 0..n_s {
            let tree = &self.switch_trees[s];
            let (best, dist) = controllers
                .iter()
                .map(|&c| {
                    let d = if c == s {
                        0.0
                    } else {
                        tree.dist[inst.switch_node(c)]
                    };
                    (c, d)
                })
                .filter(|(_, d)| d.is_finite())
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))?;
            mapping.push(best);
            latency.push(dist);
            paths.push(if best == s {
                Vec::new()
            } else {
                tree.path_to(inst, inst.switch_node(best))?
            });
        }
        let fixed_cost = match self.control_term {
            ControlTerm::PerHop => 0.0,
            ControlTerm::Literal => {
                let weight = (inst.n_hosts() * inst.n_workflows()) as f64;
                (0..n_s)
                    .map(|s| weight * inst.in_links[inst.switch_node(s)].len() as f64 * latency[s])
                    .sum()
            }
        };
        let mut controllers = controllers.to_vec();
        controllers.sort_unstable();
        Some(ControlPlan {
            controllers,
            mapping,
            latency,
            paths,
            fixed_cost,
        })
    }

    pub fn hop_costs(&self, plan: &ControlPlan) -> HopCosts {
        let inst = self.inst;
        let weights: Vec<f64> = inst
            .links
            .iter()
            .map(|l| {
                let mut w = l.latency_s;
                if self.control_term == ControlTerm::PerHop && inst.is_switch_node(l.dst) {
                    w += plan.latency[l.dst - inst.n_hosts()];
                }
                w
            })
            .collect();
        let trees = (0..inst.n_hosts())
            .map(|h| dijkstra(inst, &weights, h))
            .collect();
        HopCosts { weights, trees }
    }

    /// Routes every flow of `placement` on its cheapest path, then moves flows
    /// to alternative paths while some link is over capacity. `None` if the
    /// overload cannot be removed.
    pub fn route(&self, plan: &ControlPlan, hop: &HopCosts, placement: &[usize]) -> Option<Routed> {
        let inst = self.inst;
        let mut deployment = Deployment {
            controllers: plan.controllers.clone(),
            mapping: plan.mapping.clone(),
            placement: placement.to_vec(),
            control_paths: plan.paths.clone(),
            request_paths: Vec::with_capacity(inst.n_items()),
            response_paths: Vec::with_capacity(inst.n_workflows()),
        };
        // (source, target, bytes) of every application flow, requests first.
        let mut flows: Vec<(usize, usize, f64)> = Vec::new();
        for (w, wf) in inst.workflows.iter().enumerate() {
            let mut prev = wf.starter;
            for a in 0..wf.chain.len() {
                let h = placement[inst.item(w, a)];
                flows.push((prev, h, inst.service(w, a).input_bytes as f64));
                prev = h;
            }
        }
        for (w, wf) in inst.workflows.iter().enumerate() {
            let last = placement[inst.item(w, wf.chain.len() - 1)];
            let out = inst.service(w, wf.chain.len() - 1).output_bytes as f64;
            flows.push((last, wf.starter, out));
        }
        let mut paths: Vec<Vec<usize>> = flows
            .iter()
            .map(|&(u, v, _)| {
                if u == v {
                    Some(Vec::new())
                } else {
                    hop.trees[u].path_to(inst, v)
                }
            })
            .collect::<Option<_>>()?;

        let mut load = vec![0.0; inst.n_links()];
        let omega = inst.control_packet_bytes as f64;
        for p in &plan.paths {
            for &l in p {
                load[l] += omega;
            }
        }
        for (p, f) in paths.iter().zip(&flows) {
            for &l in p {
                load[l] += f.2;
            }
        }
        let over = |load: &[f64], l: usize| {
            load[l] > inst.links[l].capacity_bps * (1.0 + CAPACITY_TOL) + CAPACITY_TOL
        };

        let mut repaired = false;
        if (0..inst.n_links()).any(|l| over(&load, l)) {
            repaired = true;
            let mut order: Vec<usize> = (0..flows.len()).collect();
            order.sort_by(|&a, &b| flows[b].2.total_cmp(&flows[a].2).then(a.cmp(&b)));
            for _round in 0..flows.len() {
                let mut moved = false;
                for &fi in &order {
                    let (u, v, bytes) = flows[fi];
                    if bytes == 0.0 || !paths[fi].iter().any(|&l| over(&load, l)) {
                        continue;
                    }
                    for &l in &paths[fi] {
                        load[l] -= bytes;
                    }
                    let alternative = k_shortest_paths(inst, &hop.weights, u, v, self.k_paths)
                        .into_iter()
                        .find(|alt| {
                            *alt != paths[fi]
                                && alt.iter().all(|&l| {
                                    load[l] + bytes
                                        <= inst.links[l].capacity_bps * (1.0 + CAPACITY_TOL)
                                            + CAPACITY_TOL
                                })
                        });
                    if let Some(alt) = alternative {
                        paths[fi] = alt;
                        moved = true;
                    }
                    for &l in &paths[fi] {
                        load[l] += bytes;
                    }
                }
                if !(0..inst.n_links()).any(|l| over(&load, l)) || !moved {
                    break;
                }
            }
            if (0..inst.n_links()).any(|l| over(&load, l)) {
                return None;
            }
        }

        let mut cost = plan.fixed_cost;
        for (w, wf) in inst.workflows.iter().enumerate() {
            for a in 0..wf.chain.len() {
                cost += inst.exec_time(placement[inst.item(w, a)], w, a);
            }
        }
        cost += paths
            .iter()
            .map(|p| path_cost(&hop.weights, p))
            .sum::<f64>();
        let n_items = inst.n_items();
        deployment.response_paths = paths.split_off(n_items);
        deployment.request_paths = paths;
        Some(Routed {
            deployment,
            cost,
            repaired,
        })
    }
}
