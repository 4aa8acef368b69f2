//! Translation of a scenario into the placement/control/routing MILP.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::infra::{Instance, Scenario};
use crate::model::ir::{ControlTerm, ModelIr, ModelOptions, RowKey, RowMeta, Sense, Term};
use crate::model::vars::{Commodity, VarId, VarKind, VarLayout};

/// Creates the variable table. Fails on a scenario without workflows.
pub fn build_variables(inst: &Instance, options: ModelOptions) -> Result<VarLayout> {
    if inst.n_workflows() == 0 {
        return Err(Error::NoWorkflows);
    }
    Ok(VarLayout::new(
        inst,
        options.control_term == ControlTerm::PerHop,
    ))
}

/// Incrementally assembles a [`ModelIr`]. The `add_*` methods may be called
/// in any order, but [`ModelBuilder::build_objective`] must come last since
/// it also fixes variables and adds the objective-linearization rows.
pub struct ModelBuilder {
    inst: Arc<Instance>,
    layout: VarLayout,
    options: ModelOptions,
    rows: Vec<RowMeta>,
    terms: Vec<Term>,
    objective: Vec<Term>,
    fixed_zero: Vec<VarId>,
    big_m: f64,
    fingerprint: String,
    scratch: BTreeMap<VarId, f64>,
}

impl ModelBuilder {
    pub fn new(scenario: &Scenario, options: ModelOptions) -> Result<Self> {
        let inst = Arc::new(scenario.compile()?);
        let layout = build_variables(&inst, options)?;
        Ok(ModelBuilder {
            big_m: inst.total_latency(),
            inst,
            layout,
            options,
            rows: Vec::new(),
            terms: Vec::new(),
            objective: Vec::new(),
            fixed_zero: Vec::new(),
            fingerprint: scenario.fingerprint(),
            scratch: BTreeMap::new(),
        })
    }

    pub fn layout(&self) -> &VarLayout {
        &self.layout
    }

    fn add(&mut self, coef: f64, kind: VarKind) {
        let v = self.layout.id(kind);
        *self.scratch.entry(v).or_insert(0.0) += coef;
    }

    fn push_row(&mut self, key: RowKey, sense: Sense, rhs: f64) {
        let start = self.terms.len();
        for (var, coef) in std::mem::take(&mut self.scratch) {
            if coef != 0.0 {
                self.terms.push(Term { coef, var });
            }
        }
        self.rows.push(RowMeta {
            key,
            sense,
            rhs,
            start,
        });
    }

    fn add_net_flow(&mut self, node: usize, var: impl Fn(u32) -> VarKind) {
        let inst = Arc::clone(&self.inst);
        for &l in &inst.out_links[node] {
            self.add(1.0, var(l as u32));
        }
        for &l in &inst.in_links[node] {
            self.add(-1.0, var(l as u32));
        }
    }

    /// Single-host execution per item and per-host memory.
    pub fn add_placement_constraints(&mut self) {
        let inst = Arc::clone(&self.inst);
        for (w, wf) in inst.workflows.iter().enumerate() {
            for a in 0..wf.chain.len() {
                let item = inst.item(w, a) as u32;
                for h in 0..inst.n_hosts() {
                    self.add(
                        1.0,
                        VarKind::Z {
                            host: h as u32,
                            item,
                        },
                    );
                }
                self.push_row(
                    RowKey::Eq1 {
                        w: w as u32,
                        a: a as u32,
                    },
                    Sense::Eq,
                    1.0,
                );
            }
        }
        for h in 0..inst.n_hosts() {
            for (w, wf) in inst.workflows.iter().enumerate() {
                for a in 0..wf.chain.len() {
                    let item = inst.item(w, a) as u32;
                    self.add(
                        inst.service(w, a).ram_bytes as f64,
                        VarKind::Z {
                            host: h as u32,
                            item,
                        },
                    );
                }
            }
            self.push_row(
                RowKey::Eq2 { host: h as u32 },
                Sense::Le,
                inst.hosts[h].ram_bytes as f64,
            );
        }
    }

    /// Controller budget, single mapping per switch, mapping only to placed
    /// controllers.
    pub fn add_controller_constraints(&mut self) {
        let s_count = self.inst.n_switches() as u32;
        for s in 0..s_count {
            self.add(1.0, VarKind::X { switch: s });
        }
        self.push_row(RowKey::Eq4, Sense::Le, self.inst.max_controllers as f64);
        for s in 0..s_count {
            for c in 0..s_count {
                self.add(
                    1.0,
                    VarKind::Y {
                        switch: s,
                        controller: c,
                    },
                );
            }
            self.push_row(RowKey::Eq5 { switch: s }, Sense::Eq, 1.0);
        }
        for s in 0..s_count {
            for c in 0..s_count {
                self.add(
                    1.0,
                    VarKind::Y {
                        switch: s,
                        controller: c,
                    },
                );
                self.add(-1.0, VarKind::X { switch: c });
                self.push_row(
                    RowKey::Eq6 {
                        switch: s,
                        controller: c,
                    },
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    /// Conservation of request, response and intermediate flows, with the
    /// product terms of the intermediate case linearized.
    pub fn add_flow_constraints(&mut self) {
        let inst = Arc::clone(&self.inst);
        let n_hosts = inst.n_hosts();

        // First item: generated by the starter unless executed there.
        for node in 0..inst.n_nodes() {
            for h in 0..n_hosts {
                for (w, wf) in inst.workflows.iter().enumerate() {
                    let item = inst.item(w, 0) as u32;
                    let host = h as u32;
                    self.add_net_flow(node, |link| VarKind::F { link, host, item });
                    let starts = wf.starter == h;
                    let mut rhs = 0.0;
                    if !inst.is_switch_node(node) && starts {
                        // node == h: WS(1 - z[h]); otherwise: -WS z[node]
                        self.add(
                            1.0,
                            VarKind::Z {
                                host: node as u32,
                                item,
                            },
                        );
                        if node == h {
                            rhs = 1.0;
                        }
                    }
                    self.push_row(
                        RowKey::Eq7 {
                            node: node as u32,
                            host,
                            w: w as u32,
                        },
                        Sense::Eq,
                        rhs,
                    );
                }
            }
        }

        // Response: generated by the host of the last item unless it is the
        // starter, consumed by the starter.
        for node in 0..inst.n_nodes() {
            for h in 0..n_hosts {
                for (w, wf) in inst.workflows.iter().enumerate() {
                    let last = inst.item(w, wf.chain.len() - 1) as u32;
                    let (host, workflow) = (h as u32, w as u32);
                    self.add_net_flow(node, |link| VarKind::FPrime {
                        link,
                        host,
                        workflow,
                    });
                    if !inst.is_switch_node(node) {
                        if node == h && wf.starter != h {
                            self.add(-1.0, VarKind::Z { host, item: last });
                        } else if node != h && wf.starter == node {
                            self.add(1.0, VarKind::Z { host, item: last });
                        }
                    }
                    self.push_row(
                        RowKey::Eq8 {
                            node: node as u32,
                            host,
                            w: w as u32,
                        },
                        Sense::Eq,
                        0.0,
                    );
                }
            }
        }

        // Linearization of z[h, a-1] (1 - z[i, a]) and z[h, a-1] z[i, a].
        for h in 0..n_hosts as u32 {
            for i in 0..n_hosts as u32 {
                for (w, wf) in inst.workflows.iter().enumerate() {
                    for a in 1..wf.chain.len() {
                        let hop = inst.hop(w, a) as u32;
                        let prev = VarKind::Z {
                            host: h,
                            item: inst.item(w, a - 1) as u32,
                        };
                        let cur = VarKind::Z {
                            host: i,
                            item: inst.item(w, a) as u32,
                        };
                        let zp = VarKind::ZPrime {
                            host: h,
                            other: i,
                            hop,
                        };
                        let zpp = VarKind::ZDoublePrime {
                            host: h,
                            other: i,
                            hop,
                        };
                        let rows: [(u8, [(f64, VarKind); 3], f64); 6] = [
                            (9, [(-1.0, prev), (1.0, zp), (0.0, zp)], 0.0),
                            (10, [(1.0, cur), (1.0, zp), (0.0, zp)], 1.0),
                            (11, [(1.0, prev), (-1.0, cur), (-1.0, zp)], 0.0),
                            (12, [(-1.0, prev), (1.0, zpp), (0.0, zpp)], 0.0),
                            (13, [(-1.0, cur), (1.0, zpp), (0.0, zpp)], 0.0),
                            (14, [(1.0, prev), (1.0, cur), (-1.0, zpp)], 1.0),
                        ];
                        for (eq, row_terms, rhs) in rows {
                            for (coef, kind) in row_terms {
                                if coef != 0.0 {
                                    self.add(coef, kind);
                                }
                            }
                            self.push_row(
                                RowKey::Linearization {
                                    eq,
                                    host: h,
                                    other: i,
                                    w: w as u32,
                                    a: a as u32,
                                },
                                Sense::Le,
                                rhs,
                            );
                        }
                    }
                }
            }
        }

        // Intermediate items, linear form.
        for node in 0..inst.n_nodes() {
            for h in 0..n_hosts {
                for (w, wf) in inst.workflows.iter().enumerate() {
                    for a in 1..wf.chain.len() {
                        let item = inst.item(w, a) as u32;
                        let hop = inst.hop(w, a) as u32;
                        let host = h as u32;
                        self.add_net_flow(node, |link| VarKind::F { link, host, item });
                        if !inst.is_switch_node(node) {
                            if node == h {
                                self.add(
                                    -1.0,
                                    VarKind::ZPrime {
                                        host,
                                        other: host,
                                        hop,
                                    },
                                );
                            } else {
                                self.add(
                                    1.0,
                                    VarKind::ZDoublePrime {
                                        host,
                                        other: node as u32,
                                        hop,
                                    },
                                );
                            }
                        }
                        self.push_row(
                            RowKey::Eq15 {
                                node: node as u32,
                                host,
                                w: w as u32,
                                a: a as u32,
                            },
                            Sense::Eq,
                            0.0,
                        );
                    }
                }
            }
        }
    }

    /// In-band control flows and link capacities.
    pub fn add_control_and_capacity_constraints(&mut self) {
        let inst = Arc::clone(&self.inst);
        for node in 0..inst.n_nodes() {
            for s in 0..inst.n_switches() as u32 {
                self.add_net_flow(node, |link| VarKind::Cf { link, switch: s });
                let mut rhs = 0.0;
                if inst.is_switch_node(node) {
                    let other = (node - inst.n_hosts()) as u32;
                    self.add(
                        1.0,
                        VarKind::Y {
                            switch: s,
                            controller: other,
                        },
                    );
                    if other == s {
                        rhs = 1.0;
                    }
                }
                self.push_row(
                    RowKey::Eq16 {
                        node: node as u32,
                        switch: s,
                    },
                    Sense::Eq,
                    rhs,
                );
            }
        }

        let omega = inst.control_packet_bytes as f64;
        for (l, link) in inst.links.iter().enumerate() {
            let link_id = l as u32;
            for h in 0..inst.n_hosts() as u32 {
                for (w, wf) in inst.workflows.iter().enumerate() {
                    for a in 0..wf.chain.len() {
                        let item = inst.item(w, a) as u32;
                        self.add(
                            inst.service(w, a).input_bytes as f64,
                            VarKind::F {
                                link: link_id,
                                host: h,
                                item,
                            },
                        );
                    }
                    self.add(
                        inst.service(w, wf.chain.len() - 1).output_bytes as f64,
                        VarKind::FPrime {
                            link: link_id,
                            host: h,
                            workflow: w as u32,
                        },
                    );
                }
            }
            for s in 0..inst.n_switches() as u32 {
                self.add(
                    omega,
                    VarKind::Cf {
                        link: link_id,
                        switch: s,
                    },
                );
            }
            self.push_row(RowKey::Eq17 { link: link_id }, Sense::Le, link.capacity_bps);
        }
    }

    /// Execution, network-latency and control-latency terms. Placements on
    /// hosts without CPU are fixed to zero instead of priced.
    pub fn build_objective(&mut self) {
        let inst = Arc::clone(&self.inst);
        let mut obj: BTreeMap<VarId, f64> = BTreeMap::new();
        let mut put = |layout: &VarLayout, coef: f64, kind: VarKind| {
            if coef != 0.0 {
                *obj.entry(layout.id(kind)).or_insert(0.0) += coef;
            }
        };

        for h in 0..inst.n_hosts() {
            for (w, wf) in inst.workflows.iter().enumerate() {
                for a in 0..wf.chain.len() {
                    let kind = VarKind::Z {
                        host: h as u32,
                        item: inst.item(w, a) as u32,
                    };
                    if inst.hosts[h].cpu_hz > 0.0 {
                        put(&self.layout, inst.exec_time(h, w, a), kind);
                    } else {
                        self.fixed_zero.push(self.layout.id(kind));
                    }
                }
            }
        }

        for (l, link) in inst.links.iter().enumerate() {
            let link_id = l as u32;
            for h in 0..inst.n_hosts() as u32 {
                for item in 0..inst.n_items() as u32 {
                    put(
                        &self.layout,
                        link.latency_s,
                        VarKind::F {
                            link: link_id,
                            host: h,
                            item,
                        },
                    );
                }
                for w in 0..inst.n_workflows() as u32 {
                    put(
                        &self.layout,
                        link.latency_s,
                        VarKind::FPrime {
                            link: link_id,
                            host: h,
                            workflow: w,
                        },
                    );
                }
            }
        }

        match self.options.control_term {
            ControlTerm::Literal => {
                let weight = (inst.n_hosts() * inst.n_workflows()) as f64;
                for s in 0..inst.n_switches() {
                    let in_degree = inst.in_links[inst.switch_node(s)].len() as f64;
                    for (l, link) in inst.links.iter().enumerate() {
                        put(
                            &self.layout,
                            weight * in_degree * link.latency_s,
                            VarKind::Cf {
                                link: l as u32,
                                switch: s as u32,
                            },
                        );
                    }
                }
            }
            ControlTerm::PerHop => {
                // cl[s] = Σ δ cf[., s]
                for s in 0..inst.n_switches() as u32 {
                    self.add(1.0, VarKind::ControlLatency { switch: s });
                    for (l, link) in inst.links.iter().enumerate() {
                        self.add(
                            -link.latency_s,
                            VarKind::Cf {
                                link: l as u32,
                                switch: s,
                            },
                        );
                    }
                    self.push_row(RowKey::ControlDef { switch: s }, Sense::Eq, 0.0);
                }
                // t >= cl[j] - M (1 - f) for every flow on a link into switch j
                let big_m = self.big_m;
                let in_links: Vec<u32> = self.layout.switch_in_links().to_vec();
                for c in 0..self.layout.n_commodities() {
                    let commodity = self.layout.commodity(c);
                    for &link in &in_links {
                        let head = inst.links[link as usize].dst;
                        let t = VarKind::HopControl { commodity, link };
                        let t_id = self.layout.id(t);
                        self.add(1.0, t);
                        self.add(
                            -1.0,
                            VarKind::ControlLatency {
                                switch: (head - inst.n_hosts()) as u32,
                            },
                        );
                        let flow = self.layout.flow(commodity, link);
                        *self.scratch.entry(flow).or_insert(0.0) -= big_m;
                        self.push_row(RowKey::ControlHop { var: t_id }, Sense::Ge, -big_m);
                        put(&self.layout, 1.0, t);
                    }
                }
            }
        }

        self.objective = obj
            .into_iter()
            .map(|(var, coef)| Term { coef, var })
            .collect();
        self.fixed_zero.sort_unstable();
    }

    pub fn finish(self) -> ModelIr {
        ModelIr {
            instance: self.inst,
            layout: self.layout,
            options: self.options,
            rows: self.rows,
            terms: self.terms,
            objective: self.objective,
            fixed_zero: self.fixed_zero,
            big_m: self.big_m,
            fingerprint: self.fingerprint,
        }
    }
}

/// Builds the complete model with the default options.
pub fn build_model(scenario: &Scenario) -> Result<ModelIr> {
    build_model_with(scenario, ModelOptions::default())
}

pub fn build_model_with(scenario: &Scenario, options: ModelOptions) -> Result<ModelIr> {
    let mut b = ModelBuilder::new(scenario, options)?;
    b.add_placement_constraints();
    b.add_controller_constraints();
    b.add_flow_constraints();
    b.add_control_and_capacity_constraints();
    b.build_objective();
    Ok(b.finish())
}

/// Commodity whose flow variable is `v`, if `v` is an F or F' variable.
pub fn flow_commodity(kind: VarKind) -> Option<(Commodity, u32)> {
    match kind {
        VarKind::F { link, host, item } => Some((Commodity::Request { host, item }, link)),
        VarKind::FPrime {
            link,
            host,
            workflow,
        } => Some((Commodity::Response { host, workflow }, link)),
        _ => None,
    }
}
