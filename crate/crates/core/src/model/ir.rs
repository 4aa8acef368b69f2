use std::fmt;
use std::sync::Arc;

use crate::infra::Instance;
use crate::model::vars::{VarId, VarKind, VarLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Constraint family, named after the row-name prefix. The last two families
/// belong to the linearized per-hop control-latency objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Eq1,
    Eq2,
    Eq4,
    Eq5,
    Eq6,
    Eq7,
    Eq8,
    Eq9To14,
    Eq15,
    Eq16,
    Eq17,
    ControlDef,
    ControlHop,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Eq1,
        Family::Eq2,
        Family::Eq4,
        Family::Eq5,
        Family::Eq6,
        Family::Eq7,
        Family::Eq8,
        Family::Eq9To14,
        Family::Eq15,
        Family::Eq16,
        Family::Eq17,
        Family::ControlDef,
        Family::ControlHop,
    ];

    /// The eleven families of the formulation proper.
    pub const FORMULATION: [Family; 11] = [
        Family::Eq1,
        Family::Eq2,
        Family::Eq4,
        Family::Eq5,
        Family::Eq6,
        Family::Eq7,
        Family::Eq8,
        Family::Eq9To14,
        Family::Eq15,
        Family::Eq16,
        Family::Eq17,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Eq1 => "eq1",
            Family::Eq2 => "eq2",
            Family::Eq4 => "eq4",
            Family::Eq5 => "eq5",
            Family::Eq6 => "eq6",
            Family::Eq7 => "eq7",
            Family::Eq8 => "eq8",
            Family::Eq9To14 => "eq9_14",
            Family::Eq15 => "eq15",
            Family::Eq16 => "eq16",
            Family::Eq17 => "eq17",
            Family::ControlDef => "ctl_def",
            Family::ControlHop => "ctl_hop",
        }
    }

    /// Family of an MPS row name produced by [`RowKey`]'s `Display`.
    pub fn from_row_name(name: &str) -> Option<Family> {
        let prefix = name.split('_').next()?;
        Some(match prefix {
            "EQ1" => Family::Eq1,
            "EQ2" => Family::Eq2,
            "EQ4" => Family::Eq4,
            "EQ5" => Family::Eq5,
            "EQ6" => Family::Eq6,
            "EQ7" => Family::Eq7,
            "EQ8" => Family::Eq8,
            "EQ9" | "EQ10" | "EQ11" | "EQ12" | "EQ13" | "EQ14" => Family::Eq9To14,
            "EQ15" => Family::Eq15,
            "EQ16" => Family::Eq16,
            "EQ17" => Family::Eq17,
            "CTLDEF" => Family::ControlDef,
            "CTLHOP" => Family::ControlHop,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Subscripts identifying a row. `node` ranges over all nodes; `w`, `a` are
/// workflow and zero-based position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKey {
    Eq1 {
        w: u32,
        a: u32,
    },
    Eq2 {
        host: u32,
    },
    Eq4,
    Eq5 {
        switch: u32,
    },
    Eq6 {
        switch: u32,
        controller: u32,
    },
    Eq7 {
        node: u32,
        host: u32,
        w: u32,
    },
    Eq8 {
        node: u32,
        host: u32,
        w: u32,
    },
    /// `eq` selects one of the six product rows, tagged 9..=14.
    Linearization {
        eq: u8,
        host: u32,
        other: u32,
        w: u32,
        a: u32,
    },
    Eq15 {
        node: u32,
        host: u32,
        w: u32,
        a: u32,
    },
    Eq16 {
        node: u32,
        switch: u32,
    },
    Eq17 {
        link: u32,
    },
    ControlDef {
        switch: u32,
    },
    ControlHop {
        var: VarId,
    },
}

impl RowKey {
    pub fn family(&self) -> Family {
        match self {
            RowKey::Eq1 { .. } => Family::Eq1,
            RowKey::Eq2 { .. } => Family::Eq2,
            RowKey::Eq4 => Family::Eq4,
            RowKey::Eq5 { .. } => Family::Eq5,
            RowKey::Eq6 { .. } => Family::Eq6,
            RowKey::Eq7 { .. } => Family::Eq7,
            RowKey::Eq8 { .. } => Family::Eq8,
            RowKey::Linearization { .. } => Family::Eq9To14,
            RowKey::Eq15 { .. } => Family::Eq15,
            RowKey::Eq16 { .. } => Family::Eq16,
            RowKey::Eq17 { .. } => Family::Eq17,
            RowKey::ControlDef { .. } => Family::ControlDef,
            RowKey::ControlHop { .. } => Family::ControlHop,
        }
    }
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RowKey::Eq1 { w, a } => write!(f, "EQ1_w{w}_a{a}"),
            RowKey::Eq2 { host } => write!(f, "EQ2_h{host}"),
            RowKey::Eq4 => write!(f, "EQ4"),
            RowKey::Eq5 { switch } => write!(f, "EQ5_s{switch}"),
            RowKey::Eq6 { switch, controller } => write!(f, "EQ6_s{switch}_c{controller}"),
            RowKey::Eq7 { node, host, w } => write!(f, "EQ7_i{node}_h{host}_w{w}"),
            RowKey::Eq8 { node, host, w } => write!(f, "EQ8_i{node}_h{host}_w{w}"),
            RowKey::Linearization {
                eq,
                host,
                other,
                w,
                a,
            } => write!(f, "EQ{eq}_h{host}_i{other}_w{w}_a{a}"),
            RowKey::Eq15 { node, host, w, a } => write!(f, "EQ15_i{node}_h{host}_w{w}_a{a}"),
            RowKey::Eq16 { node, switch } => write!(f, "EQ16_i{node}_s{switch}"),
            RowKey::Eq17 { link } => write!(f, "EQ17_l{link}"),
            RowKey::ControlDef { switch } => write!(f, "CTLDEF_s{switch}"),
            RowKey::ControlHop { var } => write!(f, "CTLHOP_v{}", var.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub var: VarId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RowMeta {
    pub key: RowKey,
    pub sense: Sense,
    pub rhs: f64,
    pub start: usize,
}

/// Borrowed view of one row of a [`ModelIr`].
#[derive(Debug, Clone, Copy)]
pub struct LinearConstraint<'a> {
    pub key: RowKey,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: &'a [Term],
}

impl LinearConstraint<'_> {
    pub fn family(&self) -> Family {
        self.key.family()
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * values[t.var.index()])
            .sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// How the control-latency term of the objective is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlTerm {
    /// Each request/response flow entering a switch pays that switch's
    /// control-path latency, once per hop.
    #[default]
    PerHop,
    /// The plain triple sum: every switch's control latency weighted by
    /// `|H| * |W| * in_degree(s)` regardless of traffic.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelOptions {
    pub control_term: ControlTerm,
}

/// Solver-agnostic MILP: minimize `objective · v` subject to the rows, with
/// every binary variable in `{0, 1}` (or fixed to 0) and the control
/// auxiliaries continuous and non-negative.
#[derive(Debug, Clone)]
pub struct ModelIr {
    pub(crate) instance: Arc<Instance>,
    pub(crate) layout: VarLayout,
    pub(crate) options: ModelOptions,
    pub(crate) rows: Vec<RowMeta>,
    pub(crate) terms: Vec<Term>,
    pub(crate) objective: Vec<Term>,
    pub(crate) fixed_zero: Vec<VarId>,
    pub(crate) big_m: f64,
    pub(crate) fingerprint: String,
}

impl ModelIr {
    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn layout(&self) -> &VarLayout {
        &self.layout
    }

    pub fn options(&self) -> ModelOptions {
        self.options
    }

    pub fn n_vars(&self) -> usize {
        self.layout.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Fingerprint of the scenario the model was built from.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn row(&self, i: usize) -> LinearConstraint<'_> {
        let meta = &self.rows[i];
        let end = self
            .rows
            .get(i + 1)
            .map(|r| r.start)
            .unwrap_or(self.terms.len());
        LinearConstraint {
            key: meta.key,
            sense: meta.sense,
            rhs: meta.rhs,
            terms: &self.terms[meta.start..end],
        }
    }

    pub fn constraints(&self) -> impl Iterator<Item = LinearConstraint<'_>> + '_ {
        (0..self.rows.len()).map(move |i| self.row(i))
    }

    pub fn objective(&self) -> &[Term] {
        &self.objective
    }

    /// Variables fixed to zero (placements on hosts without CPU).
    pub fn fixed_zero(&self) -> &[VarId] {
        &self.fixed_zero
    }

    pub fn is_fixed_zero(&self, v: VarId) -> bool {
        self.fixed_zero.binary_search(&v).is_ok()
    }

    pub fn is_binary(&self, v: VarId) -> bool {
        self.layout.kind(v).is_binary()
    }

    pub fn var_name(&self, v: VarId) -> String {
        self.layout.name(&self.instance, v)
    }

    pub fn var_kind(&self, v: VarId) -> VarKind {
        self.layout.kind(v)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|t| t.coef * values[t.var.index()])
            .sum()
    }

    /// Number of rows per family, in [`Family::ALL`] order, omitting empty
    /// families.
    pub fn family_counts(&self) -> Vec<(Family, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.key.family()).or_insert(0usize) += 1;
        }
        counts.into_iter().collect()
    }

    pub fn count_rows(&self, family: Family) -> usize {
        self.rows
            .iter()
            .filter(|r| r.key.family() == family)
            .count()
    }

    /// Bound violation of `values` for variable `v`.
    pub fn bound_violation(&self, v: VarId, value: f64) -> f64 {
        let upper = if self.is_fixed_zero(v) {
            0.0
        } else if self.is_binary(v) {
            1.0
        } else {
            f64::INFINITY
        };
        let mut viol = (0.0 - value).max(value - upper).max(0.0);
        if self.is_binary(v) {
            viol = viol.max((value - value.round()).abs());
        }
        viol
    }
}
