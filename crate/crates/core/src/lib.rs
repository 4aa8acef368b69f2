//! Joint placement of microservices and SDN controllers, controller-switch
//! mapping and routing for edge/IoT infrastructures, formulated as a MILP.
//!
//! Typical use: load or generate a [`Scenario`], build the model with
//! [`model::build_model`], solve it with [`solvers::solve_bnb`] (or the
//! exhaustive [`solvers::solve_oracle`] on tiny instances) and inspect the
//! result with [`evaluator::response_time`].

pub mod baselines;
pub mod error;
pub mod evaluator;
pub mod infra;
pub mod model;
pub mod routing;
pub mod scenarios;
pub mod solvers;

pub use error::{Error, Result};
pub use infra::{Instance, Scenario};

#[cfg(test)]
pub(crate) mod test_support {
    use crate::infra::{
        ControlPlaneConfig, Host, HostKind, Link, Microservice, Scenario, SwitchNode, Workflow,
    };

    /// Four switches in a square, `s0-s1`, `s1-s3`, `s0-s2`, `s2-s3`, one host
    /// `h{i}` on each switch `s{i}`.
    pub fn grid_scenario() -> Scenario {
        let mut links = Vec::new();
        let mut cable = |a: &str, b: &str, latency_s: f64| {
            for (src, dst) in [(a, b), (b, a)] {
                links.push(Link {
                    src: src.into(),
                    dst: dst.into(),
                    latency_s,
                    capacity_bps: 1e7,
                });
            }
        };
        cable("s0", "s1", 0.002);
        cable("s1", "s3", 0.003);
        cable("s0", "s2", 0.001);
        cable("s2", "s3", 0.005);
        for i in 0..4 {
            cable(&format!("h{i}"), &format!("s{i}"), 0.001);
        }
        Scenario {
            schema: 1,
            hosts: (0..4)
                .map(|i| Host {
                    id: format!("h{i}"),
                    cpu_hz: 1e9,
                    ram_bytes: 1 << 30,
                    attached_switch: format!("s{i}"),
                    kind: HostKind::EdgeServer,
                })
                .collect(),
            switches: (0..4)
                .map(|i| SwitchNode {
                    id: format!("s{i}"),
                    controller_capable: true,
                })
                .collect(),
            links,
            microservices: vec![Microservice {
                id: "m0".into(),
                workload_cycles: 1e8,
                input_bytes: 1000,
                output_bytes: 1000,
                ram_bytes: 1 << 20,
            }],
            workflows: vec![Workflow {
                id: "w0".into(),
                starter_host: "h0".into(),
                chain: vec!["m0".into()],
            }],
            control: ControlPlaneConfig {
                max_controllers: 1,
                control_packet_bytes: 128,
            },
        }
    }
}
