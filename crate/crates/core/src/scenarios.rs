//! Scenario generation: smart-factory topologies, workloads and parameter
//! sweeps, plus small fixed and random instances used in tests.
//!
//! Numbers the generator needs but the factory description leaves open
//! (device hardware, microservice sizes, link attributes, fabric wiring) come
//! from [`GeneratorConfig`], which can be loaded from a TOML file named by the
//! `DADO_CONFIG` environment variable.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infra::{
    ControlPlaneConfig, Host, HostKind, Link, Microservice, Scenario, SwitchNode, Workflow,
    SCHEMA_VERSION,
};

pub const CONFIG_ENV: &str = "DADO_CONFIG";
const MIB: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub cpu_hz: f64,
    pub ram_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareProfiles {
    pub non_computing: HardwareProfile,
    pub arduino_portenta: HardwareProfile,
    pub rpi_zero: HardwareProfile,
}

impl Default for HardwareProfiles {
    fn default() -> Self {
        HardwareProfiles {
            non_computing: HardwareProfile {
                cpu_hz: 0.0,
                ram_bytes: 0,
            },
            arduino_portenta: HardwareProfile {
                cpu_hz: 480e6,
                ram_bytes: MIB,
            },
            rpi_zero: HardwareProfile {
                cpu_hz: 1e9,
                ram_bytes: 512 * MIB,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroserviceDefaults {
    pub ram_bytes: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    /// Sizes are drawn uniformly from `value * [1 - spread, 1 + spread]`.
    pub size_spread: f64,
}

impl Default for MicroserviceDefaults {
    fn default() -> Self {
        MicroserviceDefaults {
            ram_bytes: 64 * MIB,
            input_bytes: 10_000,
            output_bytes: 10_000,
            size_spread: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkDefaults {
    pub latency_s: f64,
    pub capacity_bps: f64,
}

impl Default for LinkDefaults {
    fn default() -> Self {
        LinkDefaults {
            latency_s: 0.001,
            capacity_bps: 1e7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FabricShape {
    /// Ring with random chords until every switch has `degree` neighbours
    /// (where possible).
    RingChords,
    Ring,
    FullMesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FabricConfig {
    pub shape: FabricShape,
    pub degree: usize,
}

impl Default for FabricConfig {
    fn default() -> Self {
        FabricConfig {
            shape: FabricShape::RingChords,
            degree: 3,
        }
    }
}

/// Generator defaults; every field can be overridden from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub edge_server: HardwareProfile,
    pub hardware: HardwareProfiles,
    pub microservice: MicroserviceDefaults,
    pub control_packet_bytes: u64,
    pub links: LinkDefaults,
    pub fabric: FabricConfig,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            edge_server: HardwareProfile {
                cpu_hz: 800e6,
                ram_bytes: 1024 * MIB,
            },
            hardware: HardwareProfiles::default(),
            microservice: MicroserviceDefaults::default(),
            control_packet_bytes: 128,
            links: LinkDefaults::default(),
            fabric: FabricConfig::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: GeneratorConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// The file named by `DADO_CONFIG`, or the built-in defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }

    pub fn profile(&self, hw: Hardware) -> HardwareProfile {
        match hw {
            Hardware::NonComputing => self.hardware.non_computing,
            Hardware::ArduinoPortenta => self.hardware.arduino_portenta,
            Hardware::RpiZero => self.hardware.rpi_zero,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.hardware.non_computing.cpu_hz != 0.0 || self.hardware.non_computing.ram_bytes != 0 {
            return bad("the non_computing profile must have zero CPU and memory");
        }
        if !(0.0..1.0).contains(&self.microservice.size_spread) {
            return bad("microservice.size_spread must be in [0, 1)");
        }
        if !(self.links.latency_s >= 0.0) || !(self.links.capacity_bps > 0.0) {
            return bad("links need latency >= 0 and capacity > 0");
        }
        if !(self.edge_server.cpu_hz > 0.0) {
            return bad("edge servers need a positive CPU frequency");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySize {
    Small,
    Medium,
    Large,
}

impl TopologySize {
    pub const ALL: [TopologySize; 3] = [
        TopologySize::Small,
        TopologySize::Medium,
        TopologySize::Large,
    ];

    /// `(IIoT devices, edge servers)`.
    pub fn counts(self) -> (usize, usize) {
        match self {
            TopologySize::Small => (10, 10),
            TopologySize::Medium => (25, 15),
            TopologySize::Large => (50, 25),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TopologySize::Small => "small",
            TopologySize::Medium => "medium",
            TopologySize::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hardware {
    NonComputing,
    ArduinoPortenta,
    RpiZero,
}

impl Hardware {
    pub const ALL: [Hardware; 3] = [
        Hardware::NonComputing,
        Hardware::ArduinoPortenta,
        Hardware::RpiZero,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Hardware::NonComputing => "non_computing",
            Hardware::ArduinoPortenta => "arduino_portenta",
            Hardware::RpiZero => "rpi_zero",
        }
    }
}

macro_rules! label_traits {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .into_iter()
                    .find(|v| v.label() == s)
                    .ok_or_else(|| Error::Config(format!("unknown value `{s}`")))
            }
        }
    };
}

label_traits!(TopologySize);
label_traits!(Hardware);

/// SplitMix64 step, used to derive independent seeds.
fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(base), |acc, &p| splitmix(acc ^ p))
}

fn link_pair(links: &mut Vec<Link>, a: &str, b: &str, d: LinkDefaults) {
    for (src, dst) in [(a, b), (b, a)] {
        links.push(Link {
            src: src.to_string(),
            dst: dst.to_string(),
            latency_s: d.latency_s,
            capacity_bps: d.capacity_bps,
        });
    }
}

/// Undirected switch-to-switch edges of the fabric.
fn fabric_edges(n: usize, fabric: FabricConfig, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let add = |a: usize, b: usize, edges: &mut BTreeSet<(usize, usize)>| {
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    };
    match fabric.shape {
        FabricShape::FullMesh => {
            for a in 0..n {
                for b in a + 1..n {
                    add(a, b, &mut edges);
                }
            }
        }
        FabricShape::Ring | FabricShape::RingChords => {
            for a in 0..n {
                add(a, (a + 1) % n, &mut edges);
            }
        }
    }
    if fabric.shape == FabricShape::RingChords {
        let degree = |v: usize, edges: &BTreeSet<(usize, usize)>| {
            edges.iter().filter(|&&(a, b)| a == v || b == v).count()
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for &v in &order {
            if degree(v, &edges) >= fabric.degree {
                continue;
            }
            let mut partners: Vec<usize> = (0..n)
                .filter(|&u| {
                    u != v
                        && !edges.contains(&(u.min(v), u.max(v)))
                        && degree(u, &edges) < fabric.degree
                })
                .collect();
            partners.shuffle(rng);
            for u in partners {
                if degree(v, &edges) >= fabric.degree {
                    break;
                }
                add(u, v, &mut edges);
            }
        }
    }
    edges.into_iter().collect()
}

/// Hosts, switches and links of a factory of the given size. IIoT devices
/// use the non-computing profile until a workload assigns hardware; there
/// are no workflows yet.
pub fn generate_topology(size: TopologySize, seed: u64, cfg: &GeneratorConfig) -> Scenario {
    let (n_dev, n_edge) = size.counts();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7090, size as u64]));
    let switch_id = |s: usize| format!("sw{s}");

    let switches: Vec<SwitchNode> = (0..n_edge)
        .map(|s| SwitchNode {
            id: switch_id(s),
            controller_capable: true,
        })
        .collect();
    let mut hosts = Vec::with_capacity(n_dev + n_edge);
    let mut links = Vec::new();
    for d in 0..n_dev {
        let s = rng.gen_range(0..n_edge);
        let id = format!("iot{d}");
        link_pair(&mut links, &id, &switch_id(s), cfg.links);
        hosts.push(Host {
            id,
            cpu_hz: cfg.hardware.non_computing.cpu_hz,
            ram_bytes: cfg.hardware.non_computing.ram_bytes,
            attached_switch: switch_id(s),
            kind: HostKind::IotDevice,
        });
    }
    for e in 0..n_edge {
        let id = format!("edge{e}");
        link_pair(&mut links, &id, &switch_id(e), cfg.links);
        hosts.push(Host {
            id,
            cpu_hz: cfg.edge_server.cpu_hz,
            ram_bytes: cfg.edge_server.ram_bytes,
            attached_switch: switch_id(e),
            kind: HostKind::EdgeServer,
        });
    }
    for (a, b) in fabric_edges(n_edge, cfg.fabric, &mut rng) {
        link_pair(&mut links, &switch_id(a), &switch_id(b), cfg.links);
    }
    Scenario {
        schema: SCHEMA_VERSION,
        hosts,
        switches,
        links,
        microservices: Vec::new(),
        workflows: Vec::new(),
        control: ControlPlaneConfig {
            max_controllers: 1,
            control_packet_bytes: cfg.control_packet_bytes,
        },
    }
}

/// One parameter combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SweepPoint {
    pub topology: TopologySize,
    pub controllers: u32,
    pub requests_per_device: u32,
    pub functionality_length: u32,
    pub workload_mcycles: u32,
    pub hardware: Hardware,
}

impl SweepPoint {
    pub fn id(&self) -> String {
        format!(
            "{}_c{}_r{}_l{}_m{}_{}",
            self.topology,
            self.controllers,
            self.requests_per_device,
            self.functionality_length,
            self.workload_mcycles,
            self.hardware
        )
    }
}

/// Adds hardware, the microservice catalog and workflows to a topology.
/// Every IIoT device starts `requests_per_device` workflows, each a chain
/// of `functionality_length` distinct microservices.
pub fn generate_workload(
    topology: &Scenario,
    point: &SweepPoint,
    seed: u64,
    cfg: &GeneratorConfig,
) -> Scenario {
    let mut s = topology.clone();
    // The controller count is left out so that controller sweeps share one
    // workload.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        seed,
        &[
            0x3019,
            point.topology as u64,
            point.requests_per_device as u64,
            point.functionality_length as u64,
            point.workload_mcycles as u64,
            point.hardware as u64,
        ],
    ));
    let profile = cfg.profile(point.hardware);
    for h in s.hosts.iter_mut().filter(|h| h.kind == HostKind::IotDevice) {
        h.cpu_hz = profile.cpu_hz;
        h.ram_bytes = profile.ram_bytes;
    }
    let spread = cfg.microservice.size_spread;
    let mut draw = |base: u64| -> u64 {
        if spread == 0.0 {
            base
        } else {
            (base as f64 * rng.gen_range(1.0 - spread..=1.0 + spread)).round() as u64
        }
    };
    s.microservices = (0..point.functionality_length)
        .map(|i| Microservice {
            id: format!("m{i}"),
            workload_cycles: point.workload_mcycles as f64 * 1e6,
            input_bytes: draw(cfg.microservice.input_bytes),
            output_bytes: draw(cfg.microservice.output_bytes),
            ram_bytes: draw(cfg.microservice.ram_bytes),
        })
        .collect();
    let chain: Vec<String> = s.microservices.iter().map(|m| m.id.clone()).collect();
    s.workflows = s
        .hosts
        .iter()
        .filter(|h| h.kind == HostKind::IotDevice)
        .flat_map(|h| {
            let chain = chain.clone();
            (0..point.requests_per_device).map(move |r| Workflow {
                id: format!("{}_w{r}", h.id),
                starter_host: h.id.clone(),
                chain: chain.clone(),
            })
        })
        .collect();
    s.control.max_controllers = point.controllers;
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Defaults everywhere, varying a single parameter at a time.
    #[default]
    OneAtATime,
    FullProduct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub workload_mcycles: Vec<u32>,
    pub controllers: Vec<u32>,
    pub requests_per_device: Vec<u32>,
    pub functionality_length: Vec<u32>,
    pub topology: Vec<TopologySize>,
    pub hardware: Vec<Hardware>,
    pub seed: u64,
    pub mode: SweepMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            workload_mcycles: vec![500],
            controllers: vec![1],
            requests_per_device: vec![2],
            functionality_length: vec![1],
            topology: TopologySize::ALL.to_vec(),
            hardware: vec![Hardware::NonComputing],
            seed: 0,
            mode: SweepMode::OneAtATime,
        }
    }
}

/// Values allowed for each sweep parameter.
pub const MCYCLES_VALUES: [u32; 3] = [100, 500, 1000];
pub const CONTROLLER_VALUES: [u32; 4] = [1, 2, 3, 4];
pub const REQUEST_VALUES: [u32; 4] = [1, 2, 3, 4];
pub const LENGTH_VALUES: [u32; 4] = [1, 2, 3, 6];

impl SweepConfig {
    /// Every value the parameter table lists.
    pub fn full_table() -> Self {
        SweepConfig {
            workload_mcycles: MCYCLES_VALUES.to_vec(),
            controllers: CONTROLLER_VALUES.to_vec(),
            requests_per_device: REQUEST_VALUES.to_vec(),
            functionality_length: LENGTH_VALUES.to_vec(),
            topology: TopologySize::ALL.to_vec(),
            hardware: Hardware::ALL.to_vec(),
            seed: 0,
            mode: SweepMode::FullProduct,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        fn subset(name: &str, values: &[u32], allowed: &[u32]) -> Result<()> {
            if values.is_empty() {
                return Err(Error::Config(format!("`{name}` must not be empty")));
            }
            if let Some(v) = values.iter().find(|v| !allowed.contains(v)) {
                return Err(Error::Config(format!(
                    "`{name}` value {v} is not one of {allowed:?}"
                )));
            }
            Ok(())
        }
        subset("workload_mcycles", &self.workload_mcycles, &MCYCLES_VALUES)?;
        subset("controllers", &self.controllers, &CONTROLLER_VALUES)?;
        subset(
            "requests_per_device",
            &self.requests_per_device,
            &REQUEST_VALUES,
        )?;
        subset(
            "functionality_length",
            &self.functionality_length,
            &LENGTH_VALUES,
        )?;
        if self.topology.is_empty() || self.hardware.is_empty() {
            return Err(Error::Config(
                "`topology` and `hardware` must not be empty".into(),
            ));
        }
        Ok(())
    }

    /// Parameter combinations in a fixed order. In one-at-a-time mode every
    /// topology gets the default point (the listed default if present, else
    /// the first value) plus one point per non-default value of each other
    /// parameter.
    pub fn points(&self) -> Vec<SweepPoint> {
        fn dedup<T: Ord + Copy>(v: &[T]) -> Vec<T> {
            let mut out: Vec<T> = Vec::new();
            for &x in v {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
            out
        }
        let mc = dedup(&self.workload_mcycles);
        let ct = dedup(&self.controllers);
        let rq = dedup(&self.requests_per_device);
        let ln = dedup(&self.functionality_length);
        let tp = dedup(&self.topology);
        let hw = dedup(&self.hardware);
        let mut out = Vec::new();
        match self.mode {
            SweepMode::FullProduct => {
                for &topology in &tp {
                    for &controllers in &ct {
                        for &requests_per_device in &rq {
                            for &functionality_length in &ln {
                                for &workload_mcycles in &mc {
                                    for &hardware in &hw {
                                        out.push(SweepPoint {
                                            topology,
                                            controllers,
                                            requests_per_device,
                                            functionality_length,
                                            workload_mcycles,
                                            hardware,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
            SweepMode::OneAtATime => {
                let pick = |values: &[u32], default: u32| {
                    if values.contains(&default) {
                        default
                    } else {
                        values[0]
                    }
                };
                let d_hw = if hw.contains(&Hardware::NonComputing) {
                    Hardware::NonComputing
                } else {
                    hw[0]
                };
                for &topology in &tp {
                    let base = SweepPoint {
                        topology,
                        controllers: pick(&ct, 1),
                        requests_per_device: pick(&rq, 2),
                        functionality_length: pick(&ln, 1),
                        workload_mcycles: pick(&mc, 500),
                        hardware: d_hw,
                    };
                    out.push(base);
                    for &v in ct.iter().filter(|&&v| v != base.controllers) {
                        out.push(SweepPoint {
                            controllers: v,
                            ..base
                        });
                    }
                    for &v in rq.iter().filter(|&&v| v != base.requests_per_device) {
                        out.push(SweepPoint {
                            requests_per_device: v,
                            ..base
                        });
                    }
                    for &v in ln.iter().filter(|&&v| v != base.functionality_length) {
                        out.push(SweepPoint {
                            functionality_length: v,
                            ..base
                        });
                    }
                    for &v in mc.iter().filter(|&&v| v != base.workload_mcycles) {
                        out.push(SweepPoint {
                            workload_mcycles: v,
                            ..base
                        });
                    }
                    for &v in hw.iter().filter(|&&v| v != base.hardware) {
                        out.push(SweepPoint {
                            hardware: v,
                            ..base
                        });
                    }
                }
            }
        }
        out
    }
}

/// A generated scenario with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub point: SweepPoint,
    pub seed: u64,
    pub scenario: Scenario,
}

impl SweepEntry {
    pub fn id(&self) -> String {
        self.point.id()
    }
}

/// Generates every scenario of the sweep.
pub fn enumerate_sweep(cfg: &SweepConfig, gen: &GeneratorConfig) -> Result<Vec<SweepEntry>> {
    cfg.validate()?;
    let mut topologies = std::collections::BTreeMap::new();
    Ok(cfg
        .points()
        .into_iter()
        .map(|point| {
            let topo = topologies
                .entry(point.topology)
                .or_insert_with(|| generate_topology(point.topology, cfg.seed, gen));
            SweepEntry {
                point,
                seed: cfg.seed,
                scenario: generate_workload(topo, &point, cfg.seed, gen),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub scenario_id: String,
    pub file: String,
    pub topology: TopologySize,
    pub controllers: u32,
    pub requests: u32,
    pub length: u32,
    pub mcycles: u32,
    pub hardware: Hardware,
    pub seed: u64,
    pub fingerprint: String,
}

impl ManifestRow {
    pub fn new(entry: &SweepEntry, file: &str) -> Self {
        let p = entry.point;
        ManifestRow {
            scenario_id: entry.id(),
            file: file.to_string(),
            topology: p.topology,
            controllers: p.controllers,
            requests: p.requests_per_device,
            length: p.functionality_length,
            mcycles: p.workload_mcycles,
            hardware: p.hardware,
            seed: entry.seed,
            fingerprint: entry.scenario.fingerprint(),
        }
    }
}

pub fn write_manifest(rows: &[ManifestRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One non-computing device and one 800 MHz edge server on a single switch,
/// running one 500 MCycle microservice with 1 ms links.
pub fn tiny() -> Scenario {
    let d = LinkDefaults {
        latency_s: 0.001,
        capacity_bps: 1e7,
    };
    let mut links = Vec::new();
    link_pair(&mut links, "iot0", "sw0", d);
    link_pair(&mut links, "edge0", "sw0", d);
    Scenario {
        schema: SCHEMA_VERSION,
        hosts: vec![
            Host {
                id: "iot0".into(),
                cpu_hz: 0.0,
                ram_bytes: 0,
                attached_switch: "sw0".into(),
                kind: HostKind::IotDevice,
            },
            Host {
                id: "edge0".into(),
                cpu_hz: 800e6,
                ram_bytes: 1024 * MIB,
                attached_switch: "sw0".into(),
                kind: HostKind::EdgeServer,
            },
        ],
        switches: vec![SwitchNode {
            id: "sw0".into(),
            controller_capable: true,
        }],
        links,
        microservices: vec![Microservice {
            id: "m0".into(),
            workload_cycles: 500e6,
            input_bytes: 10_000,
            output_bytes: 10_000,
            ram_bytes: 64 * MIB,
        }],
        workflows: vec![Workflow {
            id: "w0".into(),
            starter_host: "iot0".into(),
            chain: vec!["m0".into()],
        }],
        control: ControlPlaneConfig {
            max_controllers: 1,
            control_packet_bytes: 128,
        },
    }
}

/// Shape limits for [`random_micro`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroShape {
    pub max_hosts: usize,
    pub max_switches: usize,
    pub max_workflows: usize,
    pub max_length: usize,
}

impl Default for MicroShape {
    fn default() -> Self {
        MicroShape {
            max_hosts: 3,
            max_switches: 3,
            max_workflows: 2,
            max_length: 2,
        }
    }
}

/// Small random scenario with slack link capacities: random switch tree
/// plus an optional extra cable, integer-millisecond latencies, mixed host
/// CPU speeds (at least one computing host) and ample memory.
pub fn random_micro(seed: u64, shape: MicroShape) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x3C20]));
    let n_s = rng.gen_range(1..=shape.max_switches);
    let n_h = rng.gen_range(shape.max_hosts.min(2)..=shape.max_hosts);
    let n_w = rng.gen_range(1..=shape.max_workflows);
    let mut links = Vec::new();
    let cable = |a: &str, b: &str, rng: &mut ChaCha8Rng, links: &mut Vec<Link>| {
        let d = LinkDefaults {
            latency_s: rng.gen_range(1..=5) as f64 * 1e-3,
            capacity_bps: 1e12,
        };
        link_pair(links, a, b, d);
    };
    for s in 1..n_s {
        let parent = rng.gen_range(0..s);
        cable(
            &format!("sw{s}"),
            &format!("sw{parent}"),
            &mut rng,
            &mut links,
        );
    }
    if n_s == 3 && rng.gen_bool(0.5) {
        let present: BTreeSet<(String, String)> = links
            .iter()
            .map(|l| (l.src.clone(), l.dst.clone()))
            .collect();
        if !present.contains(&("sw1".to_string(), "sw2".to_string())) {
            cable("sw1", "sw2", &mut rng, &mut links);
        }
    }
    let speeds = [0.0, 0.0, 5e8, 1e9, 2e9];
    let mut hosts = Vec::new();
    for h in 0..n_h {
        let s = rng.gen_range(0..n_s);
        let cpu_hz = speeds[rng.gen_range(0..speeds.len())];
        hosts.push(Host {
            id: format!("h{h}"),
            cpu_hz,
            ram_bytes: if cpu_hz > 0.0 { 1024 * MIB } else { 0 },
            attached_switch: format!("sw{s}"),
            kind: if cpu_hz > 0.0 {
                HostKind::EdgeServer
            } else {
                HostKind::IotDevice
            },
        });
        cable(&format!("h{h}"), &format!("sw{s}"), &mut rng, &mut links);
    }
    if hosts.iter().all(|h| h.cpu_hz == 0.0) {
        let last = hosts.last_mut().expect("at least one host");
        last.cpu_hz = 1e9;
        last.ram_bytes = 1024 * MIB;
        last.kind = HostKind::EdgeServer;
    }
    let microservices: Vec<Microservice> = (0..3)
        .map(|m| Microservice {
            id: format!("m{m}"),
            workload_cycles: rng.gen_range(1..=10) as f64 * 1e8,
            input_bytes: rng.gen_range(1..=20) * 1000,
            output_bytes: rng.gen_range(1..=20) * 1000,
            ram_bytes: 64 * MIB,
        })
        .collect();
    let workflows = (0..n_w)
        .map(|w| {
            let len = rng.gen_range(1..=shape.max_length);
            Workflow {
                id: format!("w{w}"),
                starter_host: format!("h{}", rng.gen_range(0..n_h)),
                chain: (0..len)
                    .map(|_| format!("m{}", rng.gen_range(0..3)))
                    .collect(),
            }
        })
        .collect();
    Scenario {
        schema: SCHEMA_VERSION,
        hosts,
        switches: (0..n_s)
            .map(|s| SwitchNode {
                id: format!("sw{s}"),
                controller_capable: true,
            })
            .collect(),
        links,
        microservices,
        workflows,
        control: ControlPlaneConfig {
            max_controllers: if rng.gen_bool(0.5) {
                1
            } else {
                rng.gen_range(1..=n_s as u32)
            },
            control_packet_bytes: 128,
        },
    }
}
