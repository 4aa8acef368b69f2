//! Structured branch-and-bound.
//!
//! Branches on controller sets, maps switches to their nearest controller,
//! then searches placements depth-first. Each workflow's chain cost given the
//! previous host is bounded by a dynamic program. Memory enters the bound
//! through Lagrange multipliers on the host memory rows, tuned by subgradient
//! steps at the root of every controller set; with all multipliers at zero
//! the bound is exact whenever memory is slack.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::Result;
use crate::model::ModelIr;
use crate::solvers::structured::{Context, ControlPlan, HopCosts};
use crate::solvers::{Deployment, DeploymentSolution, SolveStatus, SolverConfig};

const PRUNE_TOL: f64 = 1e-12;
const TIME_CHECK_EVERY: u64 = 1024;
const SUBGRADIENT_ITERS: usize = 300;

pub fn solve_bnb(model: &ModelIr, cfg: &SolverConfig) -> Result<DeploymentSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let inst = model.instance();
    let ctx = Context::new(model, cfg.k_paths);

    let mut search = Search {
        ctx: &ctx,
        cfg,
        start,
        nodes: 0,
        timed_out: false,
        inexact: false,
        gap_used: false,
        best: None,
        gap_floor: f64::INFINITY,
        groups: Groups::new(&ctx),
    };

    // Memory makes the problem infeasible regardless of routing.
    let demand: u64 = (0..inst.n_workflows())
        .flat_map(|w| (0..inst.workflows[w].chain.len()).map(move |a| (w, a)))
        .map(|(w, a)| inst.service(w, a).ram_bytes)
        .sum();
    let supply: u64 = inst
        .hosts
        .iter()
        .filter(|h| h.cpu_hz > 0.0)
        .map(|h| h.ram_bytes)
        .sum();
    let placeable = (0..inst.n_workflows()).all(|w| {
        (0..inst.workflows[w].chain.len())
            .all(|a| (0..inst.n_hosts()).any(|h| inst.can_host(h, w, a)))
    });
    if demand > supply || !placeable {
        return Ok(finish(model, search, start, None));
    }

    let n_s = inst.n_switches();
    let max_size = inst.max_controllers.min(n_s);
    // Smallest bound among controller sets whose search did not finish.
    let mut open_lb = f64::INFINITY;

    // Under slack capacities adding a controller never hurts, so the largest
    // sets are explored first; smaller ones only if capacity interfered.
    for size in (1..=max_size).rev() {
        // Bounds are cheap to recompute, so only (bound, subset) is kept.
        let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
        for subset in combinations(n_s, size) {
            if let Some(root) = search.prepare(&subset) {
                let lb = root.plan.fixed_cost + root.plain.total();
                if lb.is_finite() {
                    candidates.push((lb, subset));
                }
            }
            if search.out_of_time() {
                // some controller sets were never bounded
                open_lb = f64::NEG_INFINITY;
                break;
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, (lb, subset)) in candidates.iter().enumerate() {
            if search.timed_out {
                open_lb = open_lb.min(
                    candidates[i..]
                        .iter()
                        .map(|c| c.0)
                        .fold(f64::INFINITY, f64::min),
                );
                break;
            }
            if search.pruned(*lb) {
                break;
            }
            let root = search.prepare(subset).expect("prepared before");
            let root_lb = search.explore(&root);
            if search.timed_out {
                open_lb = open_lb.min(root_lb.max(*lb));
            }
        }
        if !search.inexact || search.timed_out {
            break;
        }
    }

    Ok(finish(model, search, start, Some(open_lb)))
}

fn finish(
    model: &ModelIr,
    search: Search<'_>,
    start: Instant,
    open_lb: Option<f64>,
) -> DeploymentSolution {
    let wall = start.elapsed().as_secs_f64();
    match search.best {
        None => {
            let status = if search.timed_out {
                SolveStatus::TimeLimit
            } else {
                SolveStatus::Infeasible
            };
            DeploymentSolution::without_solution(model, status, "bnb", wall)
        }
        Some((cost, deployment)) => {
            let proven = !search.timed_out && !search.inexact && !search.gap_used;
            let status = if proven {
                SolveStatus::Optimal
            } else {
                SolveStatus::Feasible
            };
            let lower_bound = if proven {
                Some(cost)
            } else if search.inexact {
                // repaired routes can cost more than their bound; nothing
                // proven about the remaining controller sets
                None
            } else {
                open_lb
                    .map(|lb| lb.min(search.gap_floor).min(cost))
                    .filter(|lb| lb.is_finite())
            };
            DeploymentSolution {
                status,
                objective_value: Some(cost),
                values: deployment.materialize(model),
                solver: "bnb".into(),
                wall_time_s: wall,
                lower_bound,
                scenario_fingerprint: model.fingerprint().to_string(),
            }
        }
    }
}

/// Lexicographic `k`-subsets of `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Workflows with the same starter and chain share their bounds; a
/// workflow equal to its predecessor is its twin for symmetry breaking.
struct Groups {
    of: Vec<usize>,
    /// First workflow of every group.
    leader: Vec<usize>,
    size: Vec<usize>,
    twin_of_prev: Vec<bool>,
}

impl Groups {
    fn new(ctx: &Context<'_>) -> Self {
        let inst = ctx.inst;
        let mut index: HashMap<(usize, &[usize]), usize> = HashMap::new();
        let mut g = Groups {
            of: Vec::new(),
            leader: Vec::new(),
            size: Vec::new(),
            twin_of_prev: Vec::new(),
        };
        for (w, wf) in inst.workflows.iter().enumerate() {
            let next = g.leader.len();
            let id = *index
                .entry((wf.starter, wf.chain.as_slice()))
                .or_insert(next);
            if id == next {
                g.leader.push(w);
                g.size.push(0);
            }
            g.size[id] += 1;
            g.twin_of_prev.push(w > 0 && g.of[w - 1] == id);
            g.of.push(id);
        }
        g
    }
}

/// Optimal completion costs of one workflow group under host prices
/// `lambda` (cost per byte of memory).
struct ChainBound {
    /// `suffix[a][h]`: cheapest cost of positions `a..` with `a` on host `h`,
    /// including the response back to the starter.
    suffix: Vec<Vec<f64>>,
    /// Host of `a + 1` attaining `suffix[a][h]`.
    next: Vec<Vec<usize>>,
    best: f64,
    first: usize,
}

impl ChainBound {
    fn new(ctx: &Context<'_>, hop: &HopCosts, w: usize, lambda: &[f64]) -> Self {
        let inst = ctx.inst;
        let wf = &inst.workflows[w];
        let n_h = inst.n_hosts();
        let len = wf.chain.len();
        let mut suffix = vec![vec![f64::INFINITY; n_h]; len];
        let mut next = vec![vec![usize::MAX; n_h]; len];
        for a in (0..len).rev() {
            let price = inst.service(w, a).ram_bytes as f64;
            for h in 0..n_h {
                if !inst.can_host(h, w, a) {
                    continue;
                }
                let rest = if a + 1 == len {
                    hop.cost(h, wf.starter)
                } else {
                    let (g, c) = argmin((0..n_h).map(|g| hop.cost(h, g) + suffix[a + 1][g]));
                    next[a][h] = g;
                    c
                };
                suffix[a][h] = inst.exec_time(h, w, a) + lambda[h] * price + rest;
            }
        }
        let (first, best) = argmin((0..n_h).map(|h| hop.cost(wf.starter, h) + suffix[0][h]));
        ChainBound {
            suffix,
            next,
            best,
            first,
        }
    }

    /// Hosts of the cheapest chain.
    fn chain(&self) -> Vec<usize> {
        let mut hosts = vec![self.first];
        for a in 0..self.suffix.len() - 1 {
            hosts.push(self.next[a][hosts[a]]);
        }
        hosts
    }
}

/// Index and value of the first minimum.
fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((usize::MAX, f64::INFINITY), |acc, (i, v)| {
            if v < acc.1 {
                (i, v)
            } else {
                acc
            }
        })
}

/// Chain bounds of every group under one set of prices.
struct Bounds {
    lambda: Vec<f64>,
    chains: Vec<ChainBound>,
    /// `rest[w]`: bound of workflows `w..`.
    rest: Vec<f64>,
}

impl Bounds {
    fn new(ctx: &Context<'_>, hop: &HopCosts, groups: &Groups, lambda: Vec<f64>) -> Self {
        let chains: Vec<ChainBound> = groups
            .leader
            .iter()
            .map(|&w| ChainBound::new(ctx, hop, w, &lambda))
            .collect();
        let n_w = groups.of.len();
        let mut rest = vec![0.0; n_w + 1];
        for w in (0..n_w).rev() {
            rest[w] = rest[w + 1] + chains[groups.of[w]].best;
        }
        Bounds {
            lambda,
            chains,
            rest,
        }
    }

    fn total(&self) -> f64 {
        self.rest[0]
    }

    /// `sum_h lambda_h * ram_h`.
    fn charge(&self, ram: &[u64]) -> f64 {
        self.lambda
            .iter()
            .zip(ram)
            .map(|(l, &r)| l * r as f64)
            .sum()
    }
}

/// Everything fixed by the choice of controllers.
struct Root {
    plan: ControlPlan,
    hop: HopCosts,
    plain: Bounds,
}

struct Search<'a> {
    ctx: &'a Context<'a>,
    cfg: &'a SolverConfig,
    start: Instant,
    nodes: u64,
    timed_out: bool,
    inexact: bool,
    gap_used: bool,
    best: Option<(f64, Deployment)>,
    /// Smallest bound pruned only thanks to the gap tolerance.
    gap_floor: f64,
    groups: Groups,
}

struct Frame<'a> {
    root: &'a Root,
    priced: &'a Bounds,
    placement: Vec<usize>,
    ram_left: Vec<u64>,
    /// `priced.charge(ram_left)`, kept up to date along the path.
    charge: f64,
    /// The current workflow still equals its twin on every position so far.
    tied: bool,
}

impl<'a> Search<'a> {
    fn out_of_time(&mut self) -> bool {
        if !self.timed_out && self.start.elapsed().as_secs_f64() > self.cfg.time_limit_s {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn prepare(&self, subset: &[usize]) -> Option<Root> {
        let plan = self.ctx.control_plan(subset)?;
        let hop = self.ctx.hop_costs(&plan);
        let zero = vec![0.0; self.ctx.inst.n_hosts()];
        let plain = Bounds::new(self.ctx, &hop, &self.groups, zero);
        Some(Root { plan, hop, plain })
    }

    /// Whether a bound cannot beat the incumbent; records use of the gap.
    fn pruned(&mut self, bound: f64) -> bool {
        let Some((best, _)) = &self.best else {
            return false;
        };
        if bound >= best - PRUNE_TOL {
            return true;
        }
        if bound >= best - (self.cfg.optimality_gap * best.abs()).max(PRUNE_TOL) {
            self.gap_used = true;
            self.gap_floor = self.gap_floor.min(bound);
            return true;
        }
        false
    }

    /// Searches one controller set; returns its strongest root bound.
    fn explore(&mut self, root: &Root) -> f64 {
        let inst = self.ctx.inst;
        let ram: Vec<u64> = inst.hosts.iter().map(|h| h.ram_bytes).collect();
        let plain_lb = root.plan.fixed_cost + root.plain.total();
        let upper = self.greedy(root);
        let priced = self.price(root, &ram, upper);
        let priced_lb = root.plan.fixed_cost + priced.total() - priced.charge(&ram);
        let root_lb = plain_lb.max(priced_lb);
        if self.pruned(root_lb) {
            return root_lb;
        }
        let mut frame = Frame {
            root,
            priced: &priced,
            placement: vec![usize::MAX; inst.n_items()],
            charge: priced.charge(&ram),
            ram_left: ram,
            tied: false,
        };
        self.dfs(&mut frame, 0, root.plan.fixed_cost);
        root_lb
    }

    /// Cost of the first depth-first dive, which places every item on the
    /// host with the best plain bound that still has memory.
    fn greedy(&self, root: &Root) -> Option<f64> {
        let inst = self.ctx.inst;
        let mut ram_left: Vec<u64> = inst.hosts.iter().map(|h| h.ram_bytes).collect();
        let mut cost = root.plan.fixed_cost;
        for (w, wf) in inst.workflows.iter().enumerate() {
            let chain = &root.plain.chains[self.groups.of[w]];
            let mut prev = wf.starter;
            for a in 0..wf.chain.len() {
                let demand = inst.service(w, a).ram_bytes;
                let (h, _) = argmin((0..inst.n_hosts()).map(|h| {
                    if inst.can_host(h, w, a) && ram_left[h] >= demand {
                        root.hop.cost(prev, h) + chain.suffix[a][h]
                    } else {
                        f64::INFINITY
                    }
                }));
                if h == usize::MAX {
                    return None;
                }
                ram_left[h] -= demand;
                cost += inst.exec_time(h, w, a) + root.hop.cost(prev, h);
                prev = h;
            }
            cost += root.hop.cost(prev, wf.starter);
        }
        Some(cost)
    }

    /// Subgradient ascent on the memory multipliers. Returns the best prices
    /// found; all zero when memory is slack in the plain bound.
    fn price(&self, root: &Root, ram: &[u64], upper: Option<f64>) -> Bounds {
        let inst = self.ctx.inst;
        let n_h = inst.n_hosts();
        let usage = |b: &Bounds| {
            let mut used = vec![0.0; n_h];
            for (g, chain) in b.chains.iter().enumerate() {
                let w = self.groups.leader[g];
                for (a, h) in chain.chain().into_iter().enumerate() {
                    used[h] += (inst.service(w, a).ram_bytes * self.groups.size[g] as u64) as f64;
                }
            }
            used
        };
        let overloaded = |used: &[f64]| (0..n_h).any(|h| used[h] > ram[h] as f64);
        let zero = Bounds::new(self.ctx, &root.hop, &self.groups, vec![0.0; n_h]);
        let Some(upper) = upper else { return zero };
        if !overloaded(&usage(&zero)) {
            return zero;
        }

        let value = |b: &Bounds| root.plan.fixed_cost + b.total() - b.charge(ram);
        let mut best_value = value(&zero);
        let mut best = zero;
        let mut current_lambda = vec![0.0; n_h];
        let mut current_used = usage(&best);
        let mut current_value = best_value;
        let mut theta = 1.0;
        let mut stall = 0;
        for _ in 0..SUBGRADIENT_ITERS {
            if upper - best_value <= PRUNE_TOL.max(1e-9 * upper.abs()) || theta < 1e-6 {
                break;
            }
            let g: Vec<f64> = (0..n_h)
                .map(|h| {
                    let gh = current_used[h] - ram[h] as f64;
                    if current_lambda[h] > 0.0 || gh > 0.0 {
                        gh
                    } else {
                        0.0
                    }
                })
                .collect();
            let norm: f64 = g.iter().map(|x| x * x).sum();
            if norm == 0.0 {
                break;
            }
            let step = theta * (upper - current_value) / norm;
            for h in 0..n_h {
                current_lambda[h] = (current_lambda[h] + step * g[h]).max(0.0);
            }
            let b = Bounds::new(self.ctx, &root.hop, &self.groups, current_lambda.clone());
            current_value = value(&b);
            current_used = usage(&b);
            if current_value > best_value + PRUNE_TOL {
                best_value = current_value;
                best = b;
                stall = 0;
            } else {
                stall += 1;
                if stall >= 4 {
                    theta /= 2.0;
                    stall = 0;
                }
            }
        }
        best
    }

    fn dfs(&mut self, frame: &mut Frame<'_>, item: usize, acc: f64) {
        let inst = self.ctx.inst;
        self.nodes += 1;
        if self.nodes.is_multiple_of(TIME_CHECK_EVERY) && self.out_of_time() {
            return;
        }
        if self.timed_out {
            return;
        }
        if item == inst.n_items() {
            self.leaf(frame, acc);
            return;
        }
        let (w, a) = inst.item_position(item);
        let wf = &inst.workflows[w];
        let group = self.groups.of[w];
        let prev = if a == 0 {
            wf.starter
        } else {
            frame.placement[item - 1]
        };
        // identical consecutive workflows take non-decreasing placements
        let tied = if a == 0 {
            self.groups.twin_of_prev[w]
        } else {
            frame.tied
        };
        let floor = if tied {
            frame.placement[inst.item(w - 1, a)]
        } else {
            0
        };
        let demand = inst.service(w, a).ram_bytes;
        let plain = &frame.root.plain;
        let priced = frame.priced;
        let hop = &frame.root.hop;
        let mut options: Vec<(f64, usize)> = (floor..inst.n_hosts())
            .filter(|&h| inst.can_host(h, w, a) && frame.ram_left[h] >= demand)
            .map(|h| {
                let step = hop.cost(prev, h);
                let b_plain = step + plain.chains[group].suffix[a][h] + plain.rest[w + 1];
                let b_priced =
                    step + priced.chains[group].suffix[a][h] + priced.rest[w + 1] - frame.charge;
                (b_plain.max(b_priced), h)
            })
            .filter(|(score, _)| score.is_finite())
            .collect();
        options.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let saved_charge = frame.charge;
        for (score, h) in options {
            if self.pruned(acc + score) {
                break;
            }
            let mut step = inst.exec_time(h, w, a) + hop.cost(prev, h);
            if a + 1 == wf.chain.len() {
                step += hop.cost(h, wf.starter);
            }
            frame.placement[item] = h;
            frame.ram_left[h] -= demand;
            frame.charge = saved_charge - priced.lambda[h] * demand as f64;
            frame.tied = tied && h == floor;
            self.dfs(frame, item + 1, acc + step);
            frame.ram_left[h] += demand;
            if self.timed_out {
                break;
            }
        }
        frame.charge = saved_charge;
        frame.tied = tied;
        frame.placement[item] = usize::MAX;
    }

    fn leaf(&mut self, frame: &Frame<'_>, acc: f64) {
        match self
            .ctx
            .route(&frame.root.plan, &frame.root.hop, &frame.placement)
        {
            Some(routed) => {
                if routed.repaired {
                    self.inexact = true;
                }
                debug_assert!(routed.repaired || (routed.cost - acc).abs() < 1e-9);
                let cost = routed.cost;
                let better = self
                    .best
                    .as_ref()
                    .is_none_or(|(best, _)| cost < best - PRUNE_TOL);
                if better {
                    self.best = Some((cost, routed.deployment));
                }
            }
            None => self.inexact = true,
        }
    }
}
