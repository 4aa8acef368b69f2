mod common;

use common::{scenario, GIB};
use dado::baselines::{
    betweenness_centrality, closeness_centrality, round_robin_edge, solve_baseline, top_switches,
    BaselineStrategy, ControllerRule, Graph,
};
use dado::model::build_model;
use dado::scenarios::{random_micro, tiny, MicroShape};
use dado::solvers::{solve_bnb, solve_oracle, SolveStatus, SolverConfig};
use dado::Error;
use proptest::prelude::*;

fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> Graph {
    let mut g = Graph::new(n);
    for &(u, v, w) in edges {
        g.add_undirected(u, v, w);
    }
    g
}

/// All-pairs distances and shortest-path counts by Floyd-Warshall.
fn floyd(n: usize, edges: &[(usize, usize, f64)]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    // count shortest paths by processing nodes in distance order from each source
    let mut sigma = vec![vec![0.0; n]; n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[s][a].partial_cmp(&d[s][b]).unwrap());
        sigma[s][s] = 1.0;
        for &v in order.iter().skip(1) {
            let mut total = 0.0;
            for &(a, b, w) in edges {
                for (u, x) in [(a, b), (b, a)] {
                    if x == v && d[s][u] + w == d[s][v] {
                        total += sigma[s][u];
                    }
                }
            }
            sigma[s][v] = total;
        }
    }
    (d, sigma)
}

/// Betweenness by pair enumeration: for each unordered pair, the fraction of
/// shortest paths passing through `v`.
fn brute_betweenness(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let (d, sigma) = floyd(n, edges);
    (0..n)
        .map(|v| {
            let mut score = 0.0;
            for s in 0..n {
                for t in s + 1..n {
                    if s == v || t == v {
                        continue;
                    }
                    if d[s][v] + d[v][t] == d[s][t] {
                        score += sigma[s][v] * sigma[v][t] / sigma[s][t];
                    }
                }
            }
            score
        })
        .collect()
}

fn argmax(xs: &[f64]) -> Vec<usize> {
    let m = xs.iter().cloned().fold(f64::MIN, f64::max);
    (0..xs.len())
        .filter(|&i| (xs[i] - m).abs() <= 1e-12)
        .collect()
}

#[test]
fn path_middle_is_most_central() {
    let g = undirected(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
    assert_eq!(argmax(&betweenness_centrality(&g).unwrap()), vec![1]);
    assert_eq!(argmax(&closeness_centrality(&g).unwrap()), vec![1]);
}

#[test]
fn star_center_carries_every_peripheral_pair() {
    let edges: Vec<_> = (1..5).map(|i| (0, i, 1.0)).collect();
    let bc = betweenness_centrality(&undirected(5, &edges)).unwrap();
    assert!((bc[0] - 6.0).abs() <= 1e-12);
    assert!(bc[1..].iter().all(|&b| b == 0.0));
}

#[test]
fn symmetric_graphs_have_equal_scores() {
    let mut complete = Vec::new();
    for i in 0..5 {
        for j in i + 1..5 {
            complete.push((i, j, 1.0));
        }
    }
    let bc = betweenness_centrality(&undirected(5, &complete)).unwrap();
    assert!(bc.iter().all(|&b| (b - bc[0]).abs() <= 1e-12));
    let ring: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6, 2.0)).collect();
    let cc = closeness_centrality(&undirected(6, &ring)).unwrap();
    assert!(cc.iter().all(|&c| (c - cc[0]).abs() <= 1e-12));
}

#[test]
fn weighted_line_favours_the_cheap_side() {
    // A-B-C-D with latencies 1, 1, 10: distance sums are 15, 13, 13, 33.
    // B and C tie; B sits on the cheap side and wins on the smaller id.
    let cc =
        closeness_centrality(&undirected(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 10.0)])).unwrap();
    let sums: Vec<f64> = cc.iter().map(|c| 1.0 / c).collect();
    assert_eq!(sums, vec![15.0, 13.0, 13.0, 33.0]);
    assert_eq!(argmax(&cc), vec![1, 2]);

    // same line as switches, one host on each end switch
    let mut s = scenario(
        &[(1e9, GIB), (1e9, GIB)],
        &[0, 3],
        4,
        &[1e8],
        &[(0, vec![0])],
        1,
    );
    for l in &mut s.links {
        if (l.src == "sw2" && l.dst == "sw3") || (l.src == "sw3" && l.dst == "sw2") {
            l.latency_s = 0.010;
        } else if l.src.starts_with("sw") && l.dst.starts_with("sw") {
            l.latency_s = 0.001;
        }
    }
    let inst = s.compile().unwrap();
    assert_eq!(
        top_switches(&inst, ControllerRule::Hcc, 1).unwrap(),
        vec![1]
    );
}

#[test]
fn disconnected_graph_is_an_error() {
    let g = undirected(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
    assert!(matches!(
        betweenness_centrality(&g),
        Err(Error::Disconnected)
    ));
    assert!(matches!(closeness_centrality(&g), Err(Error::Disconnected)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn betweenness_matches_pair_enumeration(
        n in 2usize..8,
        extra in proptest::collection::vec((0usize..8, 0usize..8, 1u8..4), 0..10),
        tree in proptest::collection::vec((0usize..8, 1u8..4), 7),
    ) {
        // random spanning tree plus extra edges, small integer weights so ties are exact
        let mut edges = Vec::new();
        for v in 1..n {
            let (p, w) = tree[v - 1];
            edges.push((p % v, v, w as f64));
        }
        for (a, b, w) in extra {
            let (a, b) = (a % n, b % n);
            if a != b {
                edges.push((a, b, w as f64));
            }
        }
        let got = betweenness_centrality(&undirected(n, &edges)).unwrap();
        let want = brute_betweenness(n, &edges);
        for v in 0..n {
            prop_assert!((got[v] - want[v]).abs() <= 1e-9, "node {} got {} want {}", v, got[v], want[v]);
        }
        let (d, _) = floyd(n, &edges);
        let cc = closeness_centrality(&undirected(n, &edges)).unwrap();
        for v in 0..n {
            let total: f64 = d[v].iter().sum();
            prop_assert!((cc[v] - 1.0 / total).abs() <= 1e-12);
        }
    }
}

#[test]
fn round_robin_cycles_over_roomy_servers() {
    let s = scenario(
        &[(0.0, 0), (1e9, GIB), (1e9, GIB)],
        &[0, 0, 0],
        1,
        &[1e8; 3],
        &[(0, vec![0, 1, 2])],
        1,
    );
    let inst = s.compile().unwrap();
    assert_eq!(round_robin_edge(&inst).unwrap(), vec![1, 2, 1]);
}

#[test]
fn round_robin_skips_a_full_server() {
    // three services of 1 MiB; server 1 holds exactly one
    let s = scenario(
        &[(0.0, 0), (1e9, 1 << 20), (1e9, GIB)],
        &[0, 0, 0],
        1,
        &[1e8; 3],
        &[(0, vec![0, 1, 2])],
        1,
    );
    let inst = s.compile().unwrap();
    assert_eq!(round_robin_edge(&inst).unwrap(), vec![1, 2, 2]);
}

#[test]
fn round_robin_reports_exhausted_memory() {
    let s = scenario(
        &[(0.0, 0), (1e9, 1 << 20)],
        &[0, 0],
        1,
        &[1e8; 2],
        &[(0, vec![0, 1])],
        1,
    );
    let inst = s.compile().unwrap();
    match round_robin_edge(&inst) {
        Err(Error::CapacityExhausted { workflow, position }) => {
            assert_eq!(workflow, "w0");
            assert_eq!(position, 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn centrality_ties_go_to_the_smallest_switch() {
    // two switches in a symmetric layout
    let s = scenario(
        &[(1e9, GIB), (1e9, GIB)],
        &[0, 1],
        2,
        &[1e8],
        &[(0, vec![0])],
        1,
    );
    let inst = s.compile().unwrap();
    for rule in [ControllerRule::Hbc, ControllerRule::Hcc] {
        assert_eq!(top_switches(&inst, rule, 1).unwrap(), vec![0]);
    }
}

#[test]
fn tiny_baselines_equal_the_optimum() {
    let model = build_model(&tiny()).unwrap();
    let cfg = SolverConfig::default();
    let dado = solve_bnb(&model, &cfg).unwrap().objective_value.unwrap();
    for rule in [ControllerRule::Hbc, ControllerRule::Hcc] {
        let b = solve_baseline(&model, &BaselineStrategy::new(rule, 1), &cfg).unwrap();
        assert_eq!(b.status, SolveStatus::Feasible);
        assert!((b.objective_value.unwrap() - dado).abs() <= 1e-9);
    }
}

#[test]
fn baselines_never_beat_the_optimum() {
    let cfg = SolverConfig::default();
    let mut strictly_better = 0;
    for seed in 0..40 {
        let s = random_micro(seed, MicroShape::default());
        let model = build_model(&s).unwrap();
        let opt = solve_oracle(&model, &cfg).unwrap().objective_value.unwrap();
        for rule in [ControllerRule::Hbc, ControllerRule::Hcc] {
            let strategy = BaselineStrategy::new(rule, model.instance().max_controllers);
            let Ok(b) = solve_baseline(&model, &strategy, &cfg) else {
                continue;
            };
            if let Some(obj) = b.objective_value {
                assert!(
                    obj >= opt - 1e-9,
                    "seed {seed}: baseline {obj} < optimum {opt}"
                );
                if obj > opt + 1e-9 {
                    strictly_better += 1;
                }
            }
        }
    }
    assert!(strictly_better > 0);
}

#[test]
fn controller_count_must_fit_psi() {
    let model = build_model(&tiny()).unwrap();
    let cfg = SolverConfig::default();
    for k in [0, 2] {
        let r = solve_baseline(&model, &BaselineStrategy::new(ControllerRule::Hbc, k), &cfg);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
