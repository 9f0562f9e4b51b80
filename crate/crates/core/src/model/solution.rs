use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::NodeId;

/// Identifies one network function: `(slice, sfc, nf)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NfKey {
    pub slice: String,
    pub sfc: String,
    pub nf: String,
}

impl NfKey {
    pub fn new(slice: impl Into<String>, sfc: impl Into<String>, nf: impl Into<String>) -> Self {
        NfKey {
            slice: slice.into(),
            sfc: sfc.into(),
            nf: nf.into(),
        }
    }
}

impl fmt::Display for NfKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.slice, self.sfc, self.nf)
    }
}

/// Identifies one virtual link of a chain. `hop` is the chain position of the
/// link's downstream end, so hop 1 joins positions 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HopKey {
    pub slice: String,
    pub sfc: String,
    pub hop: usize,
}

impl HopKey {
    pub fn new(slice: impl Into<String>, sfc: impl Into<String>, hop: usize) -> Self {
        HopKey {
            slice: slice.into(),
            sfc: sfc.into(),
            hop,
        }
    }
}

impl fmt::Display for HopKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/h{}", self.slice, self.sfc, self.hop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Timeout,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::Infeasible => "INFEASIBLE",
            SolveStatus::Timeout => "TIMEOUT",
        })
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OPTIMAL" => Ok(SolveStatus::Optimal),
            "INFEASIBLE" => Ok(SolveStatus::Infeasible),
            "TIMEOUT" => Ok(SolveStatus::Timeout),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// Result of a placement: where each function runs (`assignment`), which
/// ordered node pair carries each virtual link (`routing`), the latency
/// allotted to each hop, and the set of active nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SolutionDoc", from = "SolutionDoc")]
pub struct PlacementSolution {
    pub status: SolveStatus,
    pub objective: usize,
    pub assignment: BTreeMap<NfKey, NodeId>,
    pub routing: BTreeMap<HopKey, (NodeId, NodeId)>,
    pub hop_latency_budget: BTreeMap<HopKey, f64>,
    pub active_nodes: BTreeSet<NodeId>,
    /// Root-cause notes for INFEASIBLE / TIMEOUT results.
    pub diagnostics: Option<String>,
}

impl PlacementSolution {
    pub fn empty(status: SolveStatus) -> Self {
        PlacementSolution {
            status,
            objective: 0,
            assignment: BTreeMap::new(),
            routing: BTreeMap::new(),
            hop_latency_budget: BTreeMap::new(),
            active_nodes: BTreeSet::new(),
            diagnostics: None,
        }
    }

    pub fn infeasible(reason: impl Into<String>) -> Self {
        let mut s = Self::empty(SolveStatus::Infeasible);
        s.diagnostics = Some(reason.into());
        s
    }

    /// True when the solution carries a complete placement (OPTIMAL, or
    /// TIMEOUT with an incumbent).
    pub fn has_placement(&self) -> bool {
        match self.status {
            SolveStatus::Optimal => true,
            SolveStatus::Timeout => !self.assignment.is_empty(),
            SolveStatus::Infeasible => false,
        }
    }

    /// Recompute `active_nodes` and `objective` from the assignment.
    pub fn refresh_active(&mut self) {
        self.active_nodes = self.assignment.values().cloned().collect();
        self.objective = self.active_nodes.len();
    }

    /// Merge another solution's placements into this one (disjoint slices).
    pub fn absorb(&mut self, other: &PlacementSolution) {
        self.assignment.extend(other.assignment.iter().map(|(k, v)| (k.clone(), v.clone())));
        self.routing.extend(other.routing.iter().map(|(k, v)| (k.clone(), v.clone())));
        self.hop_latency_budget
            .extend(other.hop_latency_budget.iter().map(|(k, v)| (k.clone(), *v)));
        self.refresh_active();
    }

    /// Drop every entry belonging to `slice`.
    pub fn remove_slice(&mut self, slice: &str) {
        self.assignment.retain(|k, _| k.slice != slice);
        self.routing.retain(|k, _| k.slice != slice);
        self.hop_latency_budget.retain(|k, _| k.slice != slice);
        self.refresh_active();
    }
}

#[derive(Serialize, Deserialize)]
struct AssignmentEntry {
    #[serde(flatten)]
    key: NfKey,
    node: NodeId,
}

#[derive(Serialize, Deserialize)]
struct RouteEntry {
    #[serde(flatten)]
    key: HopKey,
    from: NodeId,
    to: NodeId,
}

#[derive(Serialize, Deserialize)]
struct BudgetEntry {
    #[serde(flatten)]
    key: HopKey,
    latency: f64,
}

#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    status: SolveStatus,
    objective: usize,
    #[serde(default)]
    assignment: Vec<AssignmentEntry>,
    #[serde(default)]
    routing: Vec<RouteEntry>,
    #[serde(default)]
    hop_latency_budget: Vec<BudgetEntry>,
    #[serde(default)]
    active_nodes: BTreeSet<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<String>,
}

impl From<PlacementSolution> for SolutionDoc {
    fn from(s: PlacementSolution) -> Self {
        SolutionDoc {
            status: s.status,
            objective: s.objective,
            assignment: s
                .assignment
                .into_iter()
                .map(|(key, node)| AssignmentEntry { key, node })
                .collect(),
            routing: s
                .routing
                .into_iter()
                .map(|(key, (from, to))| RouteEntry { key, from, to })
                .collect(),
            hop_latency_budget: s
                .hop_latency_budget
                .into_iter()
                .map(|(key, latency)| BudgetEntry { key, latency })
                .collect(),
            active_nodes: s.active_nodes,
            diagnostics: s.diagnostics,
        }
    }
}

impl From<SolutionDoc> for PlacementSolution {
    fn from(d: SolutionDoc) -> Self {
        PlacementSolution {
            status: d.status,
            objective: d.objective,
            assignment: d.assignment.into_iter().map(|e| (e.key, e.node)).collect(),
            routing: d.routing.into_iter().map(|e| (e.key, (e.from, e.to))).collect(),
            hop_latency_budget: d
                .hop_latency_budget
                .into_iter()
                .map(|e| (e.key, e.latency))
                .collect(),
            active_nodes: d.active_nodes,
            diagnostics: d.diagnostics,
        }
    }
}
