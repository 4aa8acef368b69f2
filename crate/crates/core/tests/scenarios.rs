use dado::infra::HostKind;
use dado::model::build_model;
use dado::scenarios::{
    enumerate_sweep, generate_topology, generate_workload, write_manifest, GeneratorConfig,
    Hardware, ManifestRow, SweepConfig, SweepMode, SweepPoint, TopologySize,
};
use dado::solvers::{solve_bnb, solve_oracle, SolveStatus, SolverConfig};
use proptest::prelude::*;

fn point(topology: TopologySize) -> SweepPoint {
    SweepPoint {
        topology,
        controllers: 1,
        requests_per_device: 2,
        functionality_length: 1,
        workload_mcycles: 500,
        hardware: Hardware::NonComputing,
    }
}

#[test]
fn topology_sizes_have_fixed_host_counts() {
    let cfg = GeneratorConfig::default();
    for (size, devices, servers) in [
        (TopologySize::Small, 10, 10),
        (TopologySize::Medium, 25, 15),
        (TopologySize::Large, 50, 25),
    ] {
        let s = generate_topology(size, 7, &cfg);
        let n_dev = s
            .hosts
            .iter()
            .filter(|h| h.kind == HostKind::IotDevice)
            .count();
        let n_srv = s
            .hosts
            .iter()
            .filter(|h| h.kind == HostKind::EdgeServer)
            .count();
        assert_eq!((n_dev, n_srv), (devices, servers));
        assert_eq!(s.switches.len(), servers);
        for h in s.hosts.iter().filter(|h| h.kind == HostKind::EdgeServer) {
            assert_eq!((h.cpu_hz, h.ram_bytes), (800e6, 1 << 30));
        }
    }
    assert_eq!(
        generate_topology(TopologySize::Small, 0, &cfg).hosts.len(),
        20
    );
    assert_eq!(
        generate_topology(TopologySize::Large, 0, &cfg).hosts.len(),
        75
    );
}

#[test]
fn same_seed_gives_identical_scenarios() {
    let cfg = GeneratorConfig::default();
    let a = generate_topology(TopologySize::Medium, 42, &cfg);
    let b = generate_topology(TopologySize::Medium, 42, &cfg);
    assert_eq!(a.to_json_string(), b.to_json_string());
    let wa = generate_workload(&a, &point(TopologySize::Medium), 42, &cfg);
    let wb = generate_workload(&b, &point(TopologySize::Medium), 42, &cfg);
    assert_eq!(wa.to_json_string(), wb.to_json_string());
    assert_eq!(wa.fingerprint(), wb.fingerprint());
}

#[test]
fn default_workload_has_two_single_service_requests_per_device() {
    let cfg = GeneratorConfig::default();
    let topo = generate_topology(TopologySize::Small, 0, &cfg);
    let s = generate_workload(&topo, &point(TopologySize::Small), 0, &cfg);
    assert_eq!(s.workflows.len(), 20);
    assert!(s.workflows.iter().all(|w| w.chain.len() == 1));
    for w in &s.workflows {
        let starter = s.hosts.iter().find(|h| h.id == w.starter_host).unwrap();
        assert_eq!(starter.kind, HostKind::IotDevice);
    }
    assert!(s.microservices.iter().all(|m| m.workload_cycles == 500e6));
}

#[test]
fn longest_chain_lower_bound_on_one_server() {
    let cfg = GeneratorConfig::default();
    let topo = generate_topology(TopologySize::Small, 0, &cfg);
    let p = SweepPoint {
        functionality_length: 6,
        workload_mcycles: 1000,
        ..point(TopologySize::Small)
    };
    let s = generate_workload(&topo, &p, 0, &cfg);
    let cycles: f64 = s.workflows[0]
        .chain
        .iter()
        .map(|id| {
            s.microservices
                .iter()
                .find(|m| &m.id == id)
                .unwrap()
                .workload_cycles
        })
        .sum();
    assert!((cycles / 800e6 - 7.5).abs() <= 1e-12);
}

#[test]
fn hardware_profile_is_applied_to_devices() {
    let cfg = GeneratorConfig::default();
    let topo = generate_topology(TopologySize::Small, 0, &cfg);
    let p = SweepPoint {
        hardware: Hardware::RpiZero,
        ..point(TopologySize::Small)
    };
    let s = generate_workload(&topo, &p, 0, &cfg);
    for h in s.hosts.iter().filter(|h| h.kind == HostKind::IotDevice) {
        assert_eq!((h.cpu_hz, h.ram_bytes), (1e9, 512 << 20));
    }
    let non = cfg.profile(Hardware::NonComputing);
    assert_eq!((non.cpu_hz, non.ram_bytes), (0.0, 0));
}

#[test]
fn sweep_sizes() {
    let gen = GeneratorConfig::default();
    assert_eq!(SweepConfig::default().points().len(), 3);

    let cfg = SweepConfig {
        controllers: vec![1, 2, 3, 4],
        topology: vec![TopologySize::Small],
        ..SweepConfig::default()
    };
    let entries = enumerate_sweep(&cfg, &gen).unwrap();
    assert_eq!(entries.len(), 4);
    let psi: Vec<u32> = entries
        .iter()
        .map(|e| e.scenario.control.max_controllers)
        .collect();
    assert_eq!(psi, vec![1, 2, 3, 4]);
    // the controller budget does not change the workload
    assert_eq!(entries[0].scenario.workflows, entries[3].scenario.workflows);

    assert_eq!(SweepConfig::full_table().points().len(), 1728);
    let one_at_a_time = SweepConfig {
        mode: SweepMode::OneAtATime,
        ..SweepConfig::full_table()
    };
    // default point plus the other values of each parameter, per topology
    assert_eq!(one_at_a_time.points().len(), 3 * (1 + 3 + 3 + 3 + 2 + 2));
}

#[test]
fn sweep_config_rejects_values_outside_the_table() {
    assert!(SweepConfig::from_toml_str("controllers = [5]").is_err());
    assert!(SweepConfig::from_toml_str("workload_mcycles = []").is_err());
    assert!(SweepConfig::from_toml_str("colour = 1").is_err());
    let cfg =
        SweepConfig::from_toml_str("topology = [\"small\"]\nmode = \"full_product\"\nseed = 3")
            .unwrap();
    assert_eq!(cfg.topology, vec![TopologySize::Small]);
    assert_eq!(cfg.seed, 3);
}

#[test]
fn generator_config_overrides_and_rejects_unknown_keys() {
    let cfg =
        GeneratorConfig::from_toml_str("control_packet_bytes = 64\n[links]\nlatency_s = 0.002\n")
            .unwrap();
    assert_eq!(cfg.control_packet_bytes, 64);
    assert_eq!(cfg.links.latency_s, 0.002);
    assert_eq!(cfg.edge_server, GeneratorConfig::default().edge_server);
    assert!(GeneratorConfig::from_toml_str("bogus = 1").is_err());
}

#[test]
fn every_default_sweep_scenario_validates() {
    let gen = GeneratorConfig::default();
    let cfg = SweepConfig {
        mode: SweepMode::OneAtATime,
        ..SweepConfig::full_table()
    };
    for e in enumerate_sweep(&cfg, &gen).unwrap() {
        let report = e.scenario.validate();
        assert!(report.is_valid(), "{}: {report}", e.id());
    }
}

#[test]
fn manifest_lists_every_scenario() {
    let entries = enumerate_sweep(&SweepConfig::default(), &GeneratorConfig::default()).unwrap();
    let rows: Vec<ManifestRow> = entries
        .iter()
        .map(|e| ManifestRow::new(e, &format!("{}.json", e.id())))
        .collect();
    let mut buf = Vec::new();
    write_manifest(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with(
        "scenario_id,file,topology,controllers,requests,length,mcycles,hardware,seed,fingerprint\n"
    ));
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("small_c1_r2_l1_m500_non_computing"));
}

#[test]
fn memory_shortfall_is_infeasible_for_both_backends() {
    // one server, two services that each need more than half its memory
    let mut s = dado::scenarios::tiny();
    s.microservices[0].ram_bytes = 600 << 20;
    let mut second = s.workflows[0].clone();
    second.id = "w1".into();
    s.workflows.push(second);
    assert!(s.validate().is_valid());
    let m = build_model(&s).unwrap();
    assert_eq!(
        solve_oracle(&m, &SolverConfig::default()).unwrap().status,
        SolveStatus::Infeasible
    );
    assert_eq!(
        solve_bnb(&m, &SolverConfig::default()).unwrap().status,
        SolveStatus::Infeasible
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_scenarios_validate(seed in any::<u64>(), r in 1u32..=4, l in prop::sample::select(vec![1u32, 2, 3, 6])) {
        let cfg = GeneratorConfig::default();
        let topo = generate_topology(TopologySize::Small, seed, &cfg);
        let p = SweepPoint { requests_per_device: r, functionality_length: l, ..point(TopologySize::Small) };
        let s = generate_workload(&topo, &p, seed, &cfg);
        prop_assert!(s.validate().is_valid());
        prop_assert_eq!(s.workflows.len(), 10 * r as usize);
    }
}
