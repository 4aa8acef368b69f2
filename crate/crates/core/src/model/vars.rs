//! Decision variables and their dense numbering.
//!
//! Every variable kind occupies a contiguous block of ids; within a block the
//! id is a mixed-radix encoding of the subscripts, so [`VarLayout::id`] and
//! [`VarLayout::kind`] are inverse arithmetic maps and no lookup table is
//! kept.

use std::fmt;

use crate::infra::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Application traffic commodity: either the data entering workflow item
/// `item` generated by `host`, or the response of `workflow` generated by
/// `host`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Commodity {
    Request { host: u32, item: u32 },
    Response { host: u32, workflow: u32 },
}

/// Subscripts of a decision variable. Items and hops are numbered as in
/// [`Instance::item`] / [`Instance::hop`]; `host`, `other` index hosts,
/// `switch`, `controller` index switches and `link` indexes links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Host runs the workflow item.
    Z { host: u32, item: u32 },
    /// Request traffic of `(host, item)` uses `link`.
    F { link: u32, host: u32, item: u32 },
    /// Response traffic of `(host, workflow)` uses `link`.
    FPrime { link: u32, host: u32, workflow: u32 },
    /// A controller sits on the switch.
    X { switch: u32 },
    /// `switch` is mapped to the controller on `controller`.
    Y { switch: u32, controller: u32 },
    /// Control traffic of `switch` uses `link`.
    Cf { link: u32, switch: u32 },
    /// `z[host, a-1] * (1 - z[other, a])` for hop `(w, a)`.
    ZPrime { host: u32, other: u32, hop: u32 },
    /// `z[host, a-1] * z[other, a]` for hop `(w, a)`.
    ZDoublePrime { host: u32, other: u32, hop: u32 },
    /// Continuous: latency of the control path of `switch`.
    ControlLatency { switch: u32 },
    /// Continuous: control latency charged to `commodity` for entering the
    /// switch at the head of `link`.
    HopControl { commodity: Commodity, link: u32 },
}

impl VarKind {
    pub fn is_binary(&self) -> bool {
        !matches!(
            self,
            VarKind::ControlLatency { .. } | VarKind::HopControl { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Z,
    F,
    FPrime,
    X,
    Y,
    Cf,
    ZPrime,
    ZDoublePrime,
    ControlLatency,
    HopControl,
}

const BLOCKS: [Block; 10] = [
    Block::Z,
    Block::F,
    Block::FPrime,
    Block::X,
    Block::Y,
    Block::Cf,
    Block::ZPrime,
    Block::ZDoublePrime,
    Block::ControlLatency,
    Block::HopControl,
];

/// Dense numbering of all variables of one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    hosts: usize,
    switches: usize,
    links: usize,
    workflows: usize,
    items: usize,
    hops: usize,
    /// Links whose head is a switch, in link order.
    switch_in_links: Vec<u32>,
    /// Position of each link in `switch_in_links`, `u32::MAX` if the head is a host.
    switch_in_pos: Vec<u32>,
    offsets: [usize; 11],
}

impl VarLayout {
    /// `with_control_aux` adds the continuous per-hop control-latency
    /// auxiliaries.
    pub fn new(inst: &Instance, with_control_aux: bool) -> Self {
        let (h, s, l, w) = (
            inst.n_hosts(),
            inst.n_switches(),
            inst.n_links(),
            inst.n_workflows(),
        );
        let (items, hops) = (inst.n_items(), inst.n_hops());
        let switch_in_links: Vec<u32> = inst
            .links
            .iter()
            .enumerate()
            .filter(|(_, lk)| inst.is_switch_node(lk.dst))
            .map(|(i, _)| i as u32)
            .collect();
        let mut switch_in_pos = vec![u32::MAX; l];
        for (p, &li) in switch_in_links.iter().enumerate() {
            switch_in_pos[li as usize] = p as u32;
        }
        let commodities = h * items + h * w;
        let sizes = [
            h * items,
            l * h * items,
            l * h * w,
            s,
            s * s,
            l * s,
            h * h * hops,
            h * h * hops,
            if with_control_aux { s } else { 0 },
            if with_control_aux {
                commodities * switch_in_links.len()
            } else {
                0
            },
        ];
        let mut offsets = [0usize; 11];
        for (i, size) in sizes.iter().enumerate() {
            offsets[i + 1] = offsets[i] + size;
        }
        assert!(
            offsets[10] <= u32::MAX as usize,
            "model too large for 32-bit variable ids"
        );
        VarLayout {
            hosts: h,
            switches: s,
            links: l,
            workflows: w,
            items,
            hops,
            switch_in_links,
            switch_in_pos,
            offsets,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets[10]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn block_range(&self, b: Block) -> std::ops::Range<usize> {
        let i = BLOCKS.iter().position(|x| *x == b).unwrap();
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn count_z(&self) -> usize {
        self.block_range(Block::Z).len()
    }
    pub fn count_f(&self) -> usize {
        self.block_range(Block::F).len()
    }
    pub fn count_f_prime(&self) -> usize {
        self.block_range(Block::FPrime).len()
    }
    pub fn count_x(&self) -> usize {
        self.block_range(Block::X).len()
    }
    pub fn count_y(&self) -> usize {
        self.block_range(Block::Y).len()
    }
    pub fn count_cf(&self) -> usize {
        self.block_range(Block::Cf).len()
    }
    pub fn count_z_prime(&self) -> usize {
        self.block_range(Block::ZPrime).len()
    }
    pub fn count_z_double_prime(&self) -> usize {
        self.block_range(Block::ZDoublePrime).len()
    }
    pub fn count_control_aux(&self) -> usize {
        self.block_range(Block::ControlLatency).len() + self.block_range(Block::HopControl).len()
    }

    pub fn has_control_aux(&self) -> bool {
        self.count_control_aux() > 0
    }

    pub fn switch_in_links(&self) -> &[u32] {
        &self.switch_in_links
    }

    pub fn n_commodities(&self) -> usize {
        self.hosts * self.items + self.hosts * self.workflows
    }

    pub fn commodity_index(&self, c: Commodity) -> usize {
        match c {
            Commodity::Request { host, item } => host as usize * self.items + item as usize,
            Commodity::Response { host, workflow } => {
                self.hosts * self.items + host as usize * self.workflows + workflow as usize
            }
        }
    }

    pub fn commodity(&self, index: usize) -> Commodity {
        let req = self.hosts * self.items;
        if index < req {
            Commodity::Request {
                host: (index / self.items) as u32,
                item: (index % self.items) as u32,
            }
        } else {
            let r = index - req;
            Commodity::Response {
                host: (r / self.workflows) as u32,
                workflow: (r % self.workflows) as u32,
            }
        }
    }

    /// Flow variable of `commodity` on `link`.
    pub fn flow(&self, c: Commodity, link: u32) -> VarId {
        match c {
            Commodity::Request { host, item } => self.id(VarKind::F { link, host, item }),
            Commodity::Response { host, workflow } => self.id(VarKind::FPrime {
                link,
                host,
                workflow,
            }),
        }
    }

    pub fn id(&self, kind: VarKind) -> VarId {
        let (h, s, items, hops, w) = (
            self.hosts,
            self.switches,
            self.items,
            self.hops,
            self.workflows,
        );
        let (block, local) = match kind {
            VarKind::Z { host, item } => (Block::Z, host as usize * items + item as usize),
            VarKind::F { link, host, item } => (
                Block::F,
                (link as usize * h + host as usize) * items + item as usize,
            ),
            VarKind::FPrime {
                link,
                host,
                workflow,
            } => (
                Block::FPrime,
                (link as usize * h + host as usize) * w + workflow as usize,
            ),
            VarKind::X { switch } => (Block::X, switch as usize),
            VarKind::Y { switch, controller } => {
                (Block::Y, switch as usize * s + controller as usize)
            }
            VarKind::Cf { link, switch } => (Block::Cf, link as usize * s + switch as usize),
            VarKind::ZPrime { host, other, hop } => (
                Block::ZPrime,
                (host as usize * h + other as usize) * hops + hop as usize,
            ),
            VarKind::ZDoublePrime { host, other, hop } => (
                Block::ZDoublePrime,
                (host as usize * h + other as usize) * hops + hop as usize,
            ),
            VarKind::ControlLatency { switch } => (Block::ControlLatency, switch as usize),
            VarKind::HopControl { commodity, link } => {
                let pos = self.switch_in_pos[link as usize];
                assert!(pos != u32::MAX, "link {link} does not enter a switch");
                (
                    Block::HopControl,
                    self.commodity_index(commodity) * self.switch_in_links.len() + pos as usize,
                )
            }
        };
        let range = self.block_range(block);
        debug_assert!(local < range.len(), "{kind:?} out of range");
        VarId((range.start + local) as u32)
    }

    pub fn kind(&self, id: VarId) -> VarKind {
        let idx = id.index();
        assert!(idx < self.len(), "variable id {idx} out of range");
        let b = (0..10)
            .rev()
            .find(|&b| self.offsets[b] <= idx && self.offsets[b + 1] > idx);
        let b = b.expect("id inside some block");
        let local = idx - self.offsets[b];
        let (h, s, items, hops, w) = (
            self.hosts,
            self.switches,
            self.items,
            self.hops,
            self.workflows,
        );
        let u = |x: usize| x as u32;
        match BLOCKS[b] {
            Block::Z => VarKind::Z {
                host: u(local / items),
                item: u(local % items),
            },
            Block::F => VarKind::F {
                link: u(local / (h * items)),
                host: u(local / items % h),
                item: u(local % items),
            },
            Block::FPrime => VarKind::FPrime {
                link: u(local / (h * w)),
                host: u(local / w % h),
                workflow: u(local % w),
            },
            Block::X => VarKind::X { switch: u(local) },
            Block::Y => VarKind::Y {
                switch: u(local / s),
                controller: u(local % s),
            },
            Block::Cf => VarKind::Cf {
                link: u(local / s),
                switch: u(local % s),
            },
            Block::ZPrime => VarKind::ZPrime {
                host: u(local / (h * hops)),
                other: u(local / hops % h),
                hop: u(local % hops),
            },
            Block::ZDoublePrime => VarKind::ZDoublePrime {
                host: u(local / (h * hops)),
                other: u(local / hops % h),
                hop: u(local % hops),
            },
            Block::ControlLatency => VarKind::ControlLatency { switch: u(local) },
            Block::HopControl => {
                let n = self.switch_in_links.len();
                VarKind::HopControl {
                    commodity: self.commodity(local / n),
                    link: self.switch_in_links[local % n],
                }
            }
        }
    }

    /// Column name used in MPS and solution files.
    pub fn name(&self, inst: &Instance, id: VarId) -> String {
        VarName {
            kind: self.kind(id),
            inst,
        }
        .to_string()
    }

    /// Inverse of [`VarLayout::name`].
    pub fn parse_name(&self, inst: &Instance, name: &str) -> Option<VarId> {
        let mut parts = name.split('_');
        let prefix = parts.next()?;
        let mut fields = Vec::new();
        for p in parts {
            let split = p.find(|c: char| c.is_ascii_digit())?;
            let (tag, num) = p.split_at(split);
            fields.push((tag, num.parse::<u32>().ok()?));
        }
        let get = |want: &[&str]| -> Option<Vec<u32>> {
            if fields.len() != want.len() {
                return None;
            }
            fields
                .iter()
                .zip(want)
                .map(|((tag, v), w)| (tag == w).then_some(*v))
                .collect()
        };
        let item = |w: u32, a: u32| -> Option<u32> {
            let wf = inst.workflows.get(w as usize)?;
            ((a as usize) < wf.chain.len()).then(|| inst.item(w as usize, a as usize) as u32)
        };
        let hop = |w: u32, a: u32| -> Option<u32> {
            let wf = inst.workflows.get(w as usize)?;
            (a >= 1 && (a as usize) < wf.chain.len())
                .then(|| inst.hop(w as usize, a as usize) as u32)
        };
        let (h, s, l, nw) = (
            self.hosts as u32,
            self.switches as u32,
            self.links as u32,
            self.workflows as u32,
        );
        let kind = match prefix {
            "z" => {
                let v = get(&["h", "w", "a"])?;
                (v[0] < h).then_some(())?;
                VarKind::Z {
                    host: v[0],
                    item: item(v[1], v[2])?,
                }
            }
            "f" => {
                let v = get(&["l", "h", "w", "a"])?;
                (v[0] < l && v[1] < h).then_some(())?;
                VarKind::F {
                    link: v[0],
                    host: v[1],
                    item: item(v[2], v[3])?,
                }
            }
            "fp" => {
                let v = get(&["l", "h", "w"])?;
                (v[0] < l && v[1] < h && v[2] < nw).then_some(())?;
                VarKind::FPrime {
                    link: v[0],
                    host: v[1],
                    workflow: v[2],
                }
            }
            "x" => {
                let v = get(&["s"])?;
                (v[0] < s).then_some(())?;
                VarKind::X { switch: v[0] }
            }
            "y" => {
                let v = get(&["s", "c"])?;
                (v[0] < s && v[1] < s).then_some(())?;
                VarKind::Y {
                    switch: v[0],
                    controller: v[1],
                }
            }
            "cf" => {
                let v = get(&["l", "s"])?;
                (v[0] < l && v[1] < s).then_some(())?;
                VarKind::Cf {
                    link: v[0],
                    switch: v[1],
                }
            }
            "zp" | "zpp" => {
                let v = get(&["h", "i", "w", "a"])?;
                (v[0] < h && v[1] < h).then_some(())?;
                let hop = hop(v[2], v[3])?;
                if prefix == "zp" {
                    VarKind::ZPrime {
                        host: v[0],
                        other: v[1],
                        hop,
                    }
                } else {
                    VarKind::ZDoublePrime {
                        host: v[0],
                        other: v[1],
                        hop,
                    }
                }
            }
            "cl" => {
                let v = get(&["s"])?;
                (v[0] < s && self.has_control_aux()).then_some(())?;
                VarKind::ControlLatency { switch: v[0] }
            }
            "tf" => {
                let v = get(&["l", "h", "w", "a"])?;
                (v[1] < h && self.has_control_aux()).then_some(())?;
                let link = v[0];
                (*self.switch_in_pos.get(link as usize)? != u32::MAX).then_some(())?;
                VarKind::HopControl {
                    commodity: Commodity::Request {
                        host: v[1],
                        item: item(v[2], v[3])?,
                    },
                    link,
                }
            }
            "tfp" => {
                let v = get(&["l", "h", "w"])?;
                (v[1] < h && v[2] < nw && self.has_control_aux()).then_some(())?;
                let link = v[0];
                (*self.switch_in_pos.get(link as usize)? != u32::MAX).then_some(())?;
                VarKind::HopControl {
                    commodity: Commodity::Response {
                        host: v[1],
                        workflow: v[2],
                    },
                    link,
                }
            }
            _ => return None,
        };
        Some(self.id(kind))
    }

    /// All ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.len() as u32).map(VarId)
    }
}

struct VarName<'a> {
    kind: VarKind,
    inst: &'a Instance,
}

impl fmt::Display for VarName<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inst = self.inst;
        let pos = |item: u32| inst.item_position(item as usize);
        let hpos = |hop: u32| inst.hop_position(hop as usize);
        match self.kind {
            VarKind::Z { host, item } => {
                let (w, a) = pos(item);
                write!(f, "z_h{host}_w{w}_a{a}")
            }
            VarKind::F { link, host, item } => {
                let (w, a) = pos(item);
                write!(f, "f_l{link}_h{host}_w{w}_a{a}")
            }
            VarKind::FPrime {
                link,
                host,
                workflow,
            } => write!(f, "fp_l{link}_h{host}_w{workflow}"),
            VarKind::X { switch } => write!(f, "x_s{switch}"),
            VarKind::Y { switch, controller } => write!(f, "y_s{switch}_c{controller}"),
            VarKind::Cf { link, switch } => write!(f, "cf_l{link}_s{switch}"),
            VarKind::ZPrime { host, other, hop } => {
                let (w, a) = hpos(hop);
                write!(f, "zp_h{host}_i{other}_w{w}_a{a}")
            }
            VarKind::ZDoublePrime { host, other, hop } => {
                let (w, a) = hpos(hop);
                write!(f, "zpp_h{host}_i{other}_w{w}_a{a}")
            }
            VarKind::ControlLatency { switch } => write!(f, "cl_s{switch}"),
            VarKind::HopControl { commodity, link } => match commodity {
                Commodity::Request { host, item } => {
                    let (w, a) = pos(item);
                    write!(f, "tf_l{link}_h{host}_w{w}_a{a}")
                }
                Commodity::Response { host, workflow } => {
                    write!(f, "tfp_l{link}_h{host}_w{workflow}")
                }
            },
        }
    }
}
