//! Substrate and slice-layer domain types.
//!
//! The substrate is an undirected graph of [`SubstrateNode`]s (compute hosts
//! inside data centers and connector routers between them) joined by
//! [`SubstrateLink`]s that carry a bandwidth capacity and a latency. On top of
//! it, tenants submit [`SliceRequest`]s: each slice is a set of service
//! function chains ([`SfcSpec`]), each chain an ordered list of network
//! functions ([`NfSpec`]) with resource demands and placement restrictions.
//!
//! A [`PlacementSolution`] records where every function runs, which node pair
//! carries each virtual link, and which nodes end up active.

mod chain;
mod ops;
mod pairs;
mod solution;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use chain::{chain_positions, ChainPosition, RoutingConfig};
pub use ops::{authorized_nodes, gamma, residual_apply, ModelError};
pub(crate) use ops::pinned_endpoints;
pub use pairs::{eligible_pairs, eligible_pairs_with, EligiblePairs, PairMetrics, PairMode};
pub use solution::{HopKey, NfKey, PlacementSolution, SolveStatus};
pub use validate::{validate, ValidationError};

/// Identifier of a substrate node. Ordered lexicographically; that order is
/// the canonical node order everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

/// Ordered mapping from resource kind (`cpu`, `ram`, `disk`, ...) to a
/// non-negative quantity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceVector(IndexMap<String, f64>);

impl ResourceVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (K, f64)>) -> Self {
        ResourceVector(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// All-zero vector over the given kinds.
    pub fn zeros<S: AsRef<str>>(kinds: &[S]) -> Self {
        Self::from_pairs(kinds.iter().map(|k| (k.as_ref().to_string(), 0.0)))
    }

    /// Quantity of `kind`, zero when the kind is absent.
    pub fn get(&self, kind: &str) -> f64 {
        self.0.get(kind).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, kind: impl Into<String>, value: f64) {
        self.0.insert(kind.into(), value);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.values().all(|v| *v == 0.0)
    }

    /// Same kinds in the same order.
    pub fn same_kinds(&self, other: &ResourceVector) -> bool {
        self.0.len() == other.0.len() && self.0.keys().zip(other.0.keys()).all(|(a, b)| a == b)
    }

    /// Scale every quantity by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ResourceVector(self.0.iter().map(|(k, v)| (k.clone(), v * factor)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// Compute node inside a data center; may host functions.
    Host,
    /// WAN router between data centers; forwards traffic only.
    Connector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCharacteristics {
    pub security_level: u8,
    pub iaas_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default)]
    pub capacity: ResourceVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characteristics: Option<NodeCharacteristics>,
}

impl SubstrateNode {
    pub fn host(id: impl Into<String>, capacity: ResourceVector, characteristics: NodeCharacteristics) -> Self {
        SubstrateNode {
            id: NodeId::new(id),
            kind: NodeKind::Host,
            capacity,
            characteristics: Some(characteristics),
        }
    }

    pub fn connector(id: impl Into<String>, kinds: &[&str]) -> Self {
        SubstrateNode {
            id: NodeId::new(id),
            kind: NodeKind::Connector,
            capacity: ResourceVector::zeros(kinds),
            characteristics: None,
        }
    }

    pub fn is_host(&self) -> bool {
        self.kind == NodeKind::Host
    }
}

/// Undirected physical link. `bandwidth` is in Mbps, `latency` in ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateLink {
    pub endpoints: [NodeId; 2],
    pub bandwidth: f64,
    pub latency: f64,
}

impl SubstrateLink {
    pub fn new(a: impl Into<String>, b: impl Into<String>, bandwidth: f64, latency: f64) -> Self {
        SubstrateLink {
            endpoints: [NodeId::new(a), NodeId::new(b)],
            bandwidth,
            latency,
        }
    }

    pub fn connects(&self, a: &NodeId, b: &NodeId) -> bool {
        (&self.endpoints[0] == a && &self.endpoints[1] == b)
            || (&self.endpoints[0] == b && &self.endpoints[1] == a)
    }

    /// The endpoint opposite `id`, if `id` is one of the endpoints.
    pub fn other(&self, id: &NodeId) -> Option<&NodeId> {
        if &self.endpoints[0] == id {
            Some(&self.endpoints[1])
        } else if &self.endpoints[1] == id {
            Some(&self.endpoints[0])
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubstrateGraph {
    pub nodes: Vec<SubstrateNode>,
    pub links: Vec<SubstrateLink>,
}

impl SubstrateGraph {
    pub fn node(&self, id: &NodeId) -> Option<&SubstrateNode> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn node_mut(&mut self, id: &NodeId) -> Option<&mut SubstrateNode> {
        self.nodes.iter_mut().find(|n| &n.id == id)
    }

    pub fn hosts(&self) -> impl Iterator<Item = &SubstrateNode> {
        self.nodes.iter().filter(|n| n.is_host())
    }

    pub fn link(&self, a: &NodeId, b: &NodeId) -> Option<&SubstrateLink> {
        self.links.iter().find(|l| l.connects(a, b))
    }

    pub fn link_mut(&mut self, a: &NodeId, b: &NodeId) -> Option<&mut SubstrateLink> {
        self.links.iter_mut().find(|l| l.connects(a, b))
    }

    /// Resource kinds of the instance, taken from the first host.
    pub fn resource_kinds(&self) -> Vec<String> {
        self.hosts()
            .next()
            .or_else(|| self.nodes.first())
            .map(|n| n.capacity.kinds().map(str::to_string).collect())
            .unwrap_or_default()
    }

    /// Node ids in canonical (lexicographic) order.
    pub fn sorted_node_ids(&self) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self.nodes.iter().map(|n| n.id.clone()).collect();
        set.into_iter().collect()
    }
}

/// Which substrate nodes may host a function.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementConstraint {
    #[default]
    Unrestricted,
    /// Explicit list of authorized nodes.
    Nodes(BTreeSet<NodeId>),
    /// Hosts whose characteristics match. Absent fields do not filter.
    Filter {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        iaas_ids: Option<BTreeSet<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_security: Option<u8>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfSpec {
    pub id: String,
    pub demand: ResourceVector,
    #[serde(default)]
    pub placement: PlacementConstraint,
}

impl NfSpec {
    pub fn new(id: impl Into<String>, demand: ResourceVector) -> Self {
        NfSpec {
            id: id.into(),
            demand,
            placement: PlacementConstraint::Unrestricted,
        }
    }

    pub fn restricted_to<S: Into<String>>(mut self, nodes: impl IntoIterator<Item = S>) -> Self {
        self.placement = PlacementConstraint::Nodes(nodes.into_iter().map(|s| NodeId::new(s)).collect());
        self
    }
}

/// A service function chain. `latency_budget` (ms) bounds the sum of hop
/// latencies; `hop_bandwidth` (Mbps) is required on every virtual link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfcSpec {
    pub id: String,
    pub nfs: Vec<NfSpec>,
    pub latency_budget: f64,
    pub hop_bandwidth: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingress: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub egress: Option<NodeId>,
}

fn first_revision() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    pub slice_id: String,
    #[serde(default = "first_revision")]
    pub revision: u64,
    pub sfcs: Vec<SfcSpec>,
}

impl SliceRequest {
    pub fn find_nf(&self, sfc: &str, nf: &str) -> Option<(&SfcSpec, &NfSpec)> {
        let chain = self.sfcs.iter().find(|c| c.id == sfc)?;
        let func = chain.nfs.iter().find(|f| f.id == nf)?;
        Some((chain, func))
    }
}

/// Look up the chain `(slice, sfc)` in a request list.
pub fn find_sfc<'a>(requests: &'a [SliceRequest], slice: &str, sfc: &str) -> Option<&'a SfcSpec> {
    requests
        .iter()
        .find(|r| r.slice_id == slice)?
        .sfcs
        .iter()
        .find(|c| c.id == sfc)
}
