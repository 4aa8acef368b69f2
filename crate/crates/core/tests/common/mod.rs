#![allow(dead_code)]

use dado::infra::{
    ControlPlaneConfig, Host, HostKind, Link, Microservice, Scenario, SwitchNode, Workflow,
};

/// Switches `sw0..` in a line with `switch_latency` cables; host `h{i}`
/// attaches to switch `attach[i]` with 1 ms cables. `hosts` are
/// `(cpu_hz, ram_bytes)`; workflows are `(starter index, chain of
/// microservice indices)` over microservices `m{k}` of `cycles[k]`.
pub fn scenario(
    hosts: &[(f64, u64)],
    attach: &[usize],
    n_switches: usize,
    cycles: &[f64],
    workflows: &[(usize, Vec<usize>)],
    psi: u32,
) -> Scenario {
    let mut links = Vec::new();
    let mut cable = |a: String, b: String, latency_s: f64| {
        for (src, dst) in [(a.clone(), b.clone()), (b, a)] {
            links.push(Link {
                src,
                dst,
                latency_s,
                capacity_bps: 1e9,
            });
        }
    };
    for s in 1..n_switches {
        cable(format!("sw{}", s - 1), format!("sw{s}"), 0.002);
    }
    for (i, &s) in attach.iter().enumerate() {
        cable(format!("h{i}"), format!("sw{s}"), 0.001);
    }
    Scenario {
        schema: 1,
        hosts: hosts
            .iter()
            .zip(attach)
            .enumerate()
            .map(|(i, (&(cpu_hz, ram_bytes), &s))| Host {
                id: format!("h{i}"),
                cpu_hz,
                ram_bytes,
                attached_switch: format!("sw{s}"),
                kind: if cpu_hz > 0.0 {
                    HostKind::EdgeServer
                } else {
                    HostKind::IotDevice
                },
            })
            .collect(),
        switches: (0..n_switches)
            .map(|s| SwitchNode {
                id: format!("sw{s}"),
                controller_capable: true,
            })
            .collect(),
        links,
        microservices: cycles
            .iter()
            .enumerate()
            .map(|(k, &c)| Microservice {
                id: format!("m{k}"),
                workload_cycles: c,
                input_bytes: 1000,
                output_bytes: 2000,
                ram_bytes: 1 << 20,
            })
            .collect(),
        workflows: workflows
            .iter()
            .enumerate()
            .map(|(w, (starter, chain))| Workflow {
                id: format!("w{w}"),
                starter_host: format!("h{starter}"),
                chain: chain.iter().map(|k| format!("m{k}")).collect(),
            })
            .collect(),
        control: ControlPlaneConfig {
            max_controllers: psi,
            control_packet_bytes: 128,
        },
    }
}

pub const GIB: u64 = 1 << 30;
