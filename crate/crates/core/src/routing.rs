//! Shortest paths over the link graph with caller-supplied link weights.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::infra::Instance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QueueEntry {
    pub dist: f64,
    pub node: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct PathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    /// Link used to reach each node.
    pub pred: Vec<Option<usize>>,
}

impl PathTree {
    /// Links from the source to `target`, or `None` if unreachable.
    pub fn path_to(&self, inst: &Instance, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != self.source {
            let l = self.pred[node]?;
            path.push(l);
            node = inst.links[l].src;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Default)]
struct Restrictions<'a> {
    nodes: Option<&'a HashSet<usize>>,
    links: Option<&'a HashSet<usize>>,
}

fn dijkstra_inner(
    inst: &Instance,
    weights: &[f64],
    source: usize,
    target: Option<usize>,
    r: &Restrictions<'_>,
) -> PathTree {
    let n = inst.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(QueueEntry {
        dist: 0.0,
        node: source,
    });
    while let Some(QueueEntry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if Some(u) == target {
            break;
        }
        for &l in &inst.out_links[u] {
            if r.links.is_some_and(|b| b.contains(&l)) {
                continue;
            }
            let v = inst.links[l].dst;
            if done[v] || r.nodes.is_some_and(|b| b.contains(&v)) {
                continue;
            }
            let nd = d + weights[l];
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(l);
                heap.push(QueueEntry { dist: nd, node: v });
            }
        }
    }
    PathTree { source, dist, pred }
}

/// Dijkstra from `source`; `weights` is indexed by link and must be
/// non-negative.
pub fn dijkstra(inst: &Instance, weights: &[f64], source: usize) -> PathTree {
    dijkstra_inner(inst, weights, source, None, &Restrictions::default())
}

pub fn path_cost(weights: &[f64], path: &[usize]) -> f64 {
    path.iter().map(|&l| weights[l]).sum()
}

/// Up to `k` loopless paths from `source` to `target` in non-decreasing cost
/// order (Yen's algorithm). Paths are link lists.
pub fn k_shortest_paths(
    inst: &Instance,
    weights: &[f64],
    source: usize,
    target: usize,
    k: usize,
) -> Vec<Vec<usize>> {
    let mut found: Vec<Vec<usize>> = Vec::new();
    if k == 0 {
        return found;
    }
    let first = dijkstra_inner(
        inst,
        weights,
        source,
        Some(target),
        &Restrictions::default(),
    );
    match first.path_to(inst, target) {
        Some(p) => found.push(p),
        None => return found,
    }
    let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
    while found.len() < k {
        let last = found.last().unwrap().clone();
        let mut spur_node = source;
        for i in 0..last.len() {
            let root = &last[..i];
            let mut banned_links = HashSet::new();
            for p in &found {
                if p.len() > i && p[..i] == *root {
                    banned_links.insert(p[i]);
                }
            }
            let banned_nodes: HashSet<usize> = root.iter().map(|&l| inst.links[l].src).collect();
            let tree = dijkstra_inner(
                inst,
                weights,
                spur_node,
                Some(target),
                &Restrictions {
                    nodes: Some(&banned_nodes),
                    links: Some(&banned_links),
                },
            );
            if let Some(spur) = tree.path_to(inst, target) {
                let mut total = root.to_vec();
                total.extend(spur);
                if !found.contains(&total) && !candidates.iter().any(|(_, p)| *p == total) {
                    candidates.push((path_cost(weights, &total), total));
                }
            }
            spur_node = inst.links[last[i]].dst;
        }
        if candidates.is_empty() {
            break;
        }
        // Cheapest first, shorter and lexicographically smaller on ties.
        let best = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.0.total_cmp(&b.0)
                    .then(a.1.len().cmp(&b.1.len()))
                    .then(a.1.cmp(&b.1))
            })
            .map(|(i, _)| i)
            .unwrap();
        found.push(candidates.swap_remove(best).1);
    }
    found
}
