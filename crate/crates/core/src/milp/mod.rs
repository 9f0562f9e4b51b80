//! Solver-agnostic mixed-integer model of the placement problem.
//!
//! [`build_model`] emits binaries for node activation (`rho`), function
//! placement (`Y`) and virtual-link routing (`Z`), continuous per-hop latency
//! allotments (`phiL`) and their per-pair linearization copies (`phiLuv`,
//! `phiBuv`). Products of a binary with a continuous quantity are linearized
//! with an instance-scaled big-M ([`big_m`]). The model can be exported in LP
//! text ([`export_lp`]) and checked point-wise ([`evaluate`]).

mod build;
mod eval;
mod lp;

use std::collections::HashMap;
use std::fmt;

use crate::model::{HopKey, NfKey, NodeId};

pub use build::{big_m, build_model, BuildConfig, BuildError};
pub use eval::{encode_solution, evaluate, Violation};
pub use lp::export_lp;

/// Dense variable id; equals the position in [`MilpModel::variables`].
pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpVariable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// The constraint family a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintFamily {
    /// Each function runs on exactly one authorized node.
    Placement,
    /// A node hosting a function is active.
    NodeActive,
    /// Per-node, per-resource capacity.
    Resource,
    /// Each virtual link is mapped onto exactly one pair.
    LinkOneHot,
    /// Routing binaries agree with the placement of both endpoints.
    LinkCoupling,
    /// Hop latency allotments of a chain fit its budget.
    LatencyBudget,
    /// Big-M copies of the hop allotment onto each candidate pair.
    LatencyLinearization,
    /// A used pair's latency fits within the hop allotment.
    LatencyLink,
    /// Per-hop bandwidth requirement. Emits no rows: the hop bandwidth is a
    /// fixed constant substituted into the linearization rows.
    BwDemand,
    /// Big-M copies of the hop bandwidth onto each candidate pair.
    BwLinearization,
    /// Pair capacity across all virtual links mapped onto it.
    BwCapacity,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 11] = [
        ConstraintFamily::Placement,
        ConstraintFamily::NodeActive,
        ConstraintFamily::Resource,
        ConstraintFamily::LinkOneHot,
        ConstraintFamily::LinkCoupling,
        ConstraintFamily::LatencyBudget,
        ConstraintFamily::LatencyLinearization,
        ConstraintFamily::LatencyLink,
        ConstraintFamily::BwDemand,
        ConstraintFamily::BwLinearization,
        ConstraintFamily::BwCapacity,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ConstraintFamily::Placement => "PLACEMENT",
            ConstraintFamily::NodeActive => "NODE_ACTIVE",
            ConstraintFamily::Resource => "RESOURCE",
            ConstraintFamily::LinkOneHot => "LINK_ONEHOT",
            ConstraintFamily::LinkCoupling => "LINK_COUPLING",
            ConstraintFamily::LatencyBudget => "LATENCY_BUDGET",
            ConstraintFamily::LatencyLinearization => "LATENCY_LINEARIZATION",
            ConstraintFamily::LatencyLink => "LATENCY_LINK",
            ConstraintFamily::BwDemand => "BW_DEMAND",
            ConstraintFamily::BwLinearization => "BW_LINEARIZATION",
            ConstraintFamily::BwCapacity => "BW_CAPACITY",
        }
    }
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// `sum(coef * var) relation rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(f64, VarId)>,
    pub relation: Relation,
    pub rhs: f64,
    pub family: ConstraintFamily,
}

impl LinearConstraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(c, v)| c * values[*v]).sum()
    }

    /// Amount by which `values` violate the row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization model.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<MilpVariable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<(f64, VarId)>,
    pub big_m: f64,
}

impl MilpModel {
    pub fn count(&self, family: ConstraintFamily) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|(c, v)| c * values[*v]).sum()
    }
}

/// What a variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarKey {
    Rho(NodeId),
    Y(NfKey, NodeId),
    Z(HopKey, NodeId, NodeId),
    PhiL(HopKey),
    PhiLPair(HopKey, NodeId, NodeId),
    PhiBPair(HopKey, NodeId, NodeId),
}

impl VarKey {
    /// Human-readable, LP-safe name.
    pub fn name(&self) -> String {
        match self {
            VarKey::Rho(v) => format!("rho[{v}]"),
            VarKey::Y(k, v) => format!("Y[{},{},{},{v}]", k.slice, k.sfc, k.nf),
            VarKey::Z(h, u, v) => format!("Z[{},{},h{},{u},{v}]", h.slice, h.sfc, h.hop),
            VarKey::PhiL(h) => format!("phiL[{},{},h{}]", h.slice, h.sfc, h.hop),
            VarKey::PhiLPair(h, u, v) => format!("phiLuv[{},{},h{},{u},{v}]", h.slice, h.sfc, h.hop),
            VarKey::PhiBPair(h, u, v) => format!("phiBuv[{},{},h{},{u},{v}]", h.slice, h.sfc, h.hop),
        }
    }
}

/// Bidirectional map between model variables and what they represent.
#[derive(Debug, Clone, Default)]
pub struct VariableIndex {
    keys: Vec<VarKey>,
    by_key: HashMap<VarKey, VarId>,
    by_name: HashMap<String, VarId>,
}

impl VariableIndex {
    pub(crate) fn push(&mut self, key: VarKey) -> VarId {
        let id = self.keys.len();
        self.by_name.insert(key.name(), id);
        self.by_key.insert(key.clone(), id);
        self.keys.push(key);
        id
    }

    pub fn id(&self, key: &VarKey) -> Option<VarId> {
        self.by_key.get(key).copied()
    }

    pub fn key(&self, id: VarId) -> Option<&VarKey> {
        self.keys.get(id)
    }

    pub fn by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarKey)> {
        self.keys.iter().enumerate()
    }

    pub fn rho(&self, node: &NodeId) -> Option<VarId> {
        self.id(&VarKey::Rho(node.clone()))
    }

    pub fn y(&self, nf: &NfKey, node: &NodeId) -> Option<VarId> {
        self.id(&VarKey::Y(nf.clone(), node.clone()))
    }

    pub fn z(&self, hop: &HopKey, u: &NodeId, v: &NodeId) -> Option<VarId> {
        self.id(&VarKey::Z(hop.clone(), u.clone(), v.clone()))
    }
}
