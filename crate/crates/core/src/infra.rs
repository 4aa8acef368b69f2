//! Infrastructure and workload description.
//!
//! A [`Scenario`] is the file-level description: string ids, plain attribute
//! values. [`Instance`] is the compiled, densely indexed view the model
//! builder and solvers work on. Hosts occupy node indices `0..H` and switches
//! `H..H+S`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostKind {
    IotDevice,
    EdgeServer,
    FogNode,
    CloudNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub id: String,
    /// Free computational power in cycles per second.
    pub cpu_hz: f64,
    /// Free memory in bytes.
    pub ram_bytes: u64,
    pub attached_switch: String,
    pub kind: HostKind,
}

impl Host {
    /// Hosts without CPU or memory can start workflows but never run anything.
    pub fn can_compute(&self) -> bool {
        self.cpu_hz > 0.0 && self.ram_bytes > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchNode {
    pub id: String,
    #[serde(default = "default_true")]
    pub controller_capable: bool,
}

fn default_true() -> bool {
    true
}

/// Directed link. A physical cable is two links with equal attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: String,
    pub dst: String,
    pub latency_s: f64,
    /// Free capacity in bytes per second.
    pub capacity_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Microservice {
    pub id: String,
    pub workload_cycles: f64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub ram_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub id: String,
    pub starter_host: String,
    pub chain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPlaneConfig {
    pub max_controllers: u32,
    pub control_packet_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    pub hosts: Vec<Host>,
    pub switches: Vec<SwitchNode>,
    pub links: Vec<Link>,
    pub microservices: Vec<Microservice>,
    pub workflows: Vec<Workflow>,
    pub control: ControlPlaneConfig,
}

/// A single problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId { id: String },
    NegativeAttribute { owner: String, field: &'static str },
    DanglingReference { owner: String, missing: String },
    SelfLoop { node: String },
    DuplicateLink { src: String, dst: String },
    MissingAttachmentLink { host: String, switch: String },
    EmptyChain { workflow: String },
    ZeroWorkload { microservice: String },
    StarterNotHost { workflow: String, node: String },
    NoSwitches,
    NoControllerAllowed,
    Disconnected { from: String, to: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate id `{id}`"),
            Violation::NegativeAttribute { owner, field } => {
                write!(f, "`{owner}` has an invalid `{field}`")
            }
            Violation::DanglingReference { owner, missing } => {
                write!(f, "`{owner}` references unknown id `{missing}`")
            }
            Violation::SelfLoop { node } => write!(f, "link from `{node}` to itself"),
            Violation::DuplicateLink { src, dst } => {
                write!(f, "more than one link `{src}` -> `{dst}`")
            }
            Violation::MissingAttachmentLink { host, switch } => {
                write!(
                    f,
                    "host `{host}` lacks links to and from its switch `{switch}`"
                )
            }
            Violation::EmptyChain { workflow } => write!(f, "workflow `{workflow}` is empty"),
            Violation::ZeroWorkload { microservice } => {
                write!(
                    f,
                    "microservice `{microservice}` is used but has no workload"
                )
            }
            Violation::StarterNotHost { workflow, node } => {
                write!(
                    f,
                    "workflow `{workflow}` is started by `{node}`, which is not a host"
                )
            }
            Violation::NoSwitches => write!(f, "scenario has no switches"),
            Violation::NoControllerAllowed => write!(f, "max_controllers must be at least 1"),
            Violation::Disconnected { from, to } => {
                write!(f, "`{to}` is unreachable from `{from}`")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Reports every structural problem of `scenario`. An empty report means the
/// scenario can be compiled into an [`Instance`].
pub fn validate(scenario: &Scenario) -> ValidationReport {
    let mut out = Vec::new();

    let mut node_ids = HashSet::new();
    for id in scenario
        .hosts
        .iter()
        .map(|h| &h.id)
        .chain(scenario.switches.iter().map(|s| &s.id))
    {
        if !node_ids.insert(id.as_str()) {
            out.push(Violation::DuplicateId { id: id.clone() });
        }
    }
    let switch_ids: HashSet<&str> = scenario.switches.iter().map(|s| s.id.as_str()).collect();
    let host_ids: HashSet<&str> = scenario.hosts.iter().map(|h| h.id.as_str()).collect();

    if scenario.switches.is_empty() {
        out.push(Violation::NoSwitches);
    }
    if scenario.control.max_controllers == 0 {
        out.push(Violation::NoControllerAllowed);
    }

    for h in &scenario.hosts {
        if !(h.cpu_hz.is_finite() && h.cpu_hz >= 0.0) {
            out.push(Violation::NegativeAttribute {
                owner: h.id.clone(),
                field: "cpu_hz",
            });
        }
        if !switch_ids.contains(h.attached_switch.as_str()) {
            out.push(Violation::DanglingReference {
                owner: h.id.clone(),
                missing: h.attached_switch.clone(),
            });
        }
    }

    let mut pairs = HashSet::new();
    for l in &scenario.links {
        let owner = format!("{}->{}", l.src, l.dst);
        for end in [&l.src, &l.dst] {
            if !node_ids.contains(end.as_str()) {
                out.push(Violation::DanglingReference {
                    owner: owner.clone(),
                    missing: end.clone(),
                });
            }
        }
        if l.src == l.dst {
            out.push(Violation::SelfLoop {
                node: l.src.clone(),
            });
        }
        if !pairs.insert((l.src.as_str(), l.dst.as_str())) {
            out.push(Violation::DuplicateLink {
                src: l.src.clone(),
                dst: l.dst.clone(),
            });
        }
        if !(l.latency_s.is_finite() && l.latency_s >= 0.0) {
            out.push(Violation::NegativeAttribute {
                owner: owner.clone(),
                field: "latency_s",
            });
        }
        if !(l.capacity_bps.is_finite() && l.capacity_bps > 0.0) {
            out.push(Violation::NegativeAttribute {
                owner,
                field: "capacity_bps",
            });
        }
    }
    for h in &scenario.hosts {
        let sw = h.attached_switch.as_str();
        if switch_ids.contains(sw)
            && !(pairs.contains(&(h.id.as_str(), sw)) && pairs.contains(&(sw, h.id.as_str())))
        {
            out.push(Violation::MissingAttachmentLink {
                host: h.id.clone(),
                switch: h.attached_switch.clone(),
            });
        }
    }

    let mut ms_ids = HashMap::new();
    for m in &scenario.microservices {
        if ms_ids.insert(m.id.as_str(), m).is_some() {
            out.push(Violation::DuplicateId { id: m.id.clone() });
        }
        if !(m.workload_cycles.is_finite() && m.workload_cycles >= 0.0) {
            out.push(Violation::NegativeAttribute {
                owner: m.id.clone(),
                field: "workload_cycles",
            });
        }
    }

    let mut wf_ids = HashSet::new();
    let mut zero_reported = HashSet::new();
    for w in &scenario.workflows {
        if !wf_ids.insert(w.id.as_str()) {
            out.push(Violation::DuplicateId { id: w.id.clone() });
        }
        if w.chain.is_empty() {
            out.push(Violation::EmptyChain {
                workflow: w.id.clone(),
            });
        }
        if !host_ids.contains(w.starter_host.as_str()) {
            if switch_ids.contains(w.starter_host.as_str()) {
                out.push(Violation::StarterNotHost {
                    workflow: w.id.clone(),
                    node: w.starter_host.clone(),
                });
            } else {
                out.push(Violation::DanglingReference {
                    owner: w.id.clone(),
                    missing: w.starter_host.clone(),
                });
            }
        }
        for c in &w.chain {
            match ms_ids.get(c.as_str()) {
                None => out.push(Violation::DanglingReference {
                    owner: w.id.clone(),
                    missing: c.clone(),
                }),
                Some(m) if m.workload_cycles == 0.0 && zero_reported.insert(c.as_str()) => out
                    .push(Violation::ZeroWorkload {
                        microservice: c.clone(),
                    }),
                Some(_) => {}
            }
        }
    }

    // Connectivity only makes sense once every link endpoint resolves.
    let links_resolve = scenario
        .links
        .iter()
        .all(|l| node_ids.contains(l.src.as_str()) && node_ids.contains(l.dst.as_str()));
    if links_resolve && !node_ids.is_empty() {
        if let Some((from, to)) = first_unreachable_pair(scenario) {
            out.push(Violation::Disconnected { from, to });
        }
    }

    ValidationReport { violations: out }
}

/// Checks strong connectivity over all nodes via forward and reverse BFS
/// from the first node.
fn first_unreachable_pair(scenario: &Scenario) -> Option<(String, String)> {
    let names: Vec<&str> = scenario
        .hosts
        .iter()
        .map(|h| h.id.as_str())
        .chain(scenario.switches.iter().map(|s| s.id.as_str()))
        .collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = names.len();
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for l in &scenario.links {
        let (a, b) = (index[l.src.as_str()], index[l.dst.as_str()]);
        fwd[a].push(b);
        rev[b].push(a);
    }
    let reach = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    };
    let forward = reach(&fwd);
    if let Some(v) = forward.iter().position(|s| !s) {
        return Some((names[0].to_string(), names[v].to_string()));
    }
    let backward = reach(&rev);
    backward
        .iter()
        .position(|s| !s)
        .map(|v| (names[v].to_string(), names[0].to_string()))
}

/// `SW(i)`: whether `node` is a switch.
pub fn is_switch(scenario: &Scenario, node: &str) -> Result<bool> {
    if scenario.switches.iter().any(|s| s.id == node) {
        Ok(true)
    } else if scenario.hosts.iter().any(|h| h.id == node) {
        Ok(false)
    } else {
        Err(Error::UnknownNode(node.to_string()))
    }
}

/// `WS(w, h)`: whether workflow `workflow` is started by host `host`.
pub fn workflow_starts(scenario: &Scenario, workflow: &str, host: &str) -> Result<bool> {
    let w = scenario
        .workflows
        .iter()
        .find(|w| w.id == workflow)
        .ok_or_else(|| Error::UnknownWorkflow(workflow.to_string()))?;
    if !scenario.hosts.iter().any(|h| h.id == host) {
        return Err(Error::UnknownHost(host.to_string()));
    }
    Ok(w.starter_host == host)
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        if scenario.schema != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: scenario.schema,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json_string();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding; identifies the scenario in
    /// solution files.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Validates and builds the dense view.
    pub fn compile(&self) -> Result<Instance> {
        let report = validate(self);
        if !report.is_valid() {
            return Err(Error::InvalidScenario(report.to_string()));
        }
        Ok(Instance::new(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostData {
    pub cpu_hz: f64,
    pub ram_bytes: u64,
    pub kind: HostKind,
}

impl HostData {
    pub fn can_compute(&self) -> bool {
        self.cpu_hz > 0.0 && self.ram_bytes > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkData {
    pub src: usize,
    pub dst: usize,
    pub latency_s: f64,
    pub capacity_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroserviceData {
    pub workload_cycles: f64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub ram_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowData {
    pub starter: usize,
    /// Microservice indices in chain order.
    pub chain: Vec<usize>,
}

/// Dense, validated view of a [`Scenario`].
///
/// A workflow position `(w, a)` (zero-based `a`) is an *item*; items are
/// numbered workflow-major. Positions `a >= 1` are *hops* and are numbered the
/// same way; they index the linearization variables.
#[derive(Debug, Clone)]
pub struct Instance {
    pub host_ids: Vec<String>,
    pub switch_ids: Vec<String>,
    pub microservice_ids: Vec<String>,
    pub workflow_ids: Vec<String>,
    pub hosts: Vec<HostData>,
    pub links: Vec<LinkData>,
    pub out_links: Vec<Vec<usize>>,
    pub in_links: Vec<Vec<usize>>,
    pub microservices: Vec<MicroserviceData>,
    pub workflows: Vec<WorkflowData>,
    pub max_controllers: usize,
    pub control_packet_bytes: u64,
    item_offsets: Vec<usize>,
    hop_offsets: Vec<usize>,
}

impl Instance {
    fn new(scenario: &Scenario) -> Self {
        let host_ids: Vec<String> = scenario.hosts.iter().map(|h| h.id.clone()).collect();
        let switch_ids: Vec<String> = scenario.switches.iter().map(|s| s.id.clone()).collect();
        let node_index: HashMap<&str, usize> = host_ids
            .iter()
            .chain(switch_ids.iter())
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let ms_index: HashMap<&str, usize> = scenario
            .microservices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.as_str(), i))
            .collect();

        let n_nodes = host_ids.len() + switch_ids.len();
        let links: Vec<LinkData> = scenario
            .links
            .iter()
            .map(|l| LinkData {
                src: node_index[l.src.as_str()],
                dst: node_index[l.dst.as_str()],
                latency_s: l.latency_s,
                capacity_bps: l.capacity_bps,
            })
            .collect();
        let mut out_links = vec![Vec::new(); n_nodes];
        let mut in_links = vec![Vec::new(); n_nodes];
        for (i, l) in links.iter().enumerate() {
            out_links[l.src].push(i);
            in_links[l.dst].push(i);
        }

        let workflows: Vec<WorkflowData> = scenario
            .workflows
            .iter()
            .map(|w| WorkflowData {
                starter: node_index[w.starter_host.as_str()],
                chain: w.chain.iter().map(|c| ms_index[c.as_str()]).collect(),
            })
            .collect();
        let mut item_offsets = Vec::with_capacity(workflows.len() + 1);
        let mut hop_offsets = Vec::with_capacity(workflows.len() + 1);
        let (mut items, mut hops) = (0, 0);
        for w in &workflows {
            item_offsets.push(items);
            hop_offsets.push(hops);
            items += w.chain.len();
            hops += w.chain.len() - 1;
        }
        item_offsets.push(items);
        hop_offsets.push(hops);

        Instance {
            host_ids,
            switch_ids,
            microservice_ids: scenario
                .microservices
                .iter()
                .map(|m| m.id.clone())
                .collect(),
            workflow_ids: scenario.workflows.iter().map(|w| w.id.clone()).collect(),
            hosts: scenario
                .hosts
                .iter()
                .map(|h| HostData {
                    cpu_hz: h.cpu_hz,
                    ram_bytes: h.ram_bytes,
                    kind: h.kind,
                })
                .collect(),
            links,
            out_links,
            in_links,
            microservices: scenario
                .microservices
                .iter()
                .map(|m| MicroserviceData {
                    workload_cycles: m.workload_cycles,
                    input_bytes: m.input_bytes,
                    output_bytes: m.output_bytes,
                    ram_bytes: m.ram_bytes,
                })
                .collect(),
            workflows,
            max_controllers: scenario.control.max_controllers as usize,
            control_packet_bytes: scenario.control.control_packet_bytes,
            item_offsets,
            hop_offsets,
        }
    }

    pub fn n_hosts(&self) -> usize {
        self.hosts.len()
    }

    pub fn n_switches(&self) -> usize {
        self.switch_ids.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.hosts.len() + self.switch_ids.len()
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_workflows(&self) -> usize {
        self.workflows.len()
    }

    /// `Σ_w |w|`.
    pub fn n_items(&self) -> usize {
        *self.item_offsets.last().unwrap_or(&0)
    }

    /// `Σ_w (|w| - 1)`.
    pub fn n_hops(&self) -> usize {
        *self.hop_offsets.last().unwrap_or(&0)
    }

    pub fn item(&self, w: usize, a: usize) -> usize {
        debug_assert!(a < self.workflows[w].chain.len());
        self.item_offsets[w] + a
    }

    /// Index of hop `(w, a)` for `a >= 1`.
    pub fn hop(&self, w: usize, a: usize) -> usize {
        debug_assert!(a >= 1 && a < self.workflows[w].chain.len());
        self.hop_offsets[w] + a - 1
    }

    /// Inverse of [`Instance::item`].
    pub fn item_position(&self, item: usize) -> (usize, usize) {
        let w = self.item_offsets.partition_point(|&o| o <= item) - 1;
        (w, item - self.item_offsets[w])
    }

    pub fn hop_position(&self, hop: usize) -> (usize, usize) {
        // Workflows of length 1 own no hops, so skip over equal offsets.
        let w = self.hop_offsets.partition_point(|&o| o <= hop) - 1;
        (w, hop - self.hop_offsets[w] + 1)
    }

    pub fn is_switch_node(&self, node: usize) -> bool {
        node >= self.hosts.len()
    }

    pub fn switch_node(&self, s: usize) -> usize {
        self.hosts.len() + s
    }

    pub fn node_id(&self, node: usize) -> &str {
        if node < self.hosts.len() {
            &self.host_ids[node]
        } else {
            &self.switch_ids[node - self.hosts.len()]
        }
    }

    /// Microservice at position `a` of workflow `w`.
    pub fn service(&self, w: usize, a: usize) -> &MicroserviceData {
        &self.microservices[self.workflows[w].chain[a]]
    }

    pub fn can_host(&self, h: usize, w: usize, a: usize) -> bool {
        self.hosts[h].cpu_hz > 0.0 && self.service(w, a).ram_bytes <= self.hosts[h].ram_bytes
    }

    /// Execution time of `(w, a)` on host `h`, infinite for hosts without CPU.
    pub fn exec_time(&self, h: usize, w: usize, a: usize) -> f64 {
        let p = self.hosts[h].cpu_hz;
        if p > 0.0 {
            self.service(w, a).workload_cycles / p
        } else {
            f64::INFINITY
        }
    }

    /// Upper bound on the latency of any set of distinct links.
    pub fn total_latency(&self) -> f64 {
        self.links.iter().map(|l| l.latency_s).sum()
    }
}
