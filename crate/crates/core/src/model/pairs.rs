use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::{NodeId, SubstrateGraph};

/// Which node pairs a virtual link may be mapped onto.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    /// Physical links only, plus self-pairs.
    #[default]
    Direct,
    /// Every host pair, through its shortest (then widest) substrate path.
    #[serde(alias = "logical_mesh")]
    Mesh,
}

impl std::str::FromStr for PairMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(PairMode::Direct),
            "mesh" | "logical_mesh" | "logical-mesh" => Ok(PairMode::Mesh),
            other => Err(format!("unknown pair mode `{other}`")),
        }
    }
}

/// Effective weights of an eligible ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMetrics {
    /// ms; zero for self-pairs.
    pub latency: f64,
    /// Mbps; `f64::INFINITY` for self-pairs.
    pub bandwidth: f64,
    /// Substrate nodes traversed, endpoints included. A single node for
    /// self-pairs, two for a physical link.
    pub path: Vec<NodeId>,
}

impl PairMetrics {
    fn self_pair(v: &NodeId) -> Self {
        PairMetrics {
            latency: 0.0,
            bandwidth: f64::INFINITY,
            path: vec![v.clone()],
        }
    }

    pub fn is_self(&self) -> bool {
        self.path.len() == 1
    }
}

/// Ordered pairs `(u, v)` onto which a virtual link may be mapped. Both
/// orientations of every pair are present with identical metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct EligiblePairs {
    pub mode: PairMode,
    pairs: BTreeMap<(NodeId, NodeId), PairMetrics>,
}

impl EligiblePairs {
    pub fn get(&self, u: &NodeId, v: &NodeId) -> Option<&PairMetrics> {
        self.pairs.get(&(u.clone(), v.clone()))
    }

    pub fn contains(&self, u: &NodeId, v: &NodeId) -> bool {
        self.get(u, v).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &PairMetrics)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest finite pair latency.
    pub fn max_latency(&self) -> f64 {
        self.pairs.values().map(|m| m.latency).fold(0.0, f64::max)
    }

    /// Largest finite pair bandwidth (self-pairs excluded).
    pub fn max_bandwidth(&self) -> f64 {
        self.pairs
            .values()
            .filter(|m| !m.is_self())
            .map(|m| m.bandwidth)
            .fold(0.0, f64::max)
    }
}

/// Eligible node pairs of `graph` under `mode`.
pub fn eligible_pairs(graph: &SubstrateGraph, mode: PairMode) -> EligiblePairs {
    eligible_pairs_with(graph, mode, &BTreeSet::new())
}

/// Like [`eligible_pairs`], additionally treating `extra` nodes (pinned chain
/// endpoints, possibly connectors) as mesh members.
pub fn eligible_pairs_with(graph: &SubstrateGraph, mode: PairMode, extra: &BTreeSet<NodeId>) -> EligiblePairs {
    let mut pairs = BTreeMap::new();
    match mode {
        PairMode::Direct => {
            for node in &graph.nodes {
                pairs.insert((node.id.clone(), node.id.clone()), PairMetrics::self_pair(&node.id));
            }
            for link in &graph.links {
                let [a, b] = &link.endpoints;
                if a == b || graph.node(a).is_none() || graph.node(b).is_none() {
                    continue;
                }
                let metrics = PairMetrics {
                    latency: link.latency,
                    bandwidth: link.bandwidth,
                    path: vec![a.clone(), b.clone()],
                };
                let mut reverse = metrics.clone();
                reverse.path.reverse();
                pairs.insert((a.clone(), b.clone()), metrics);
                pairs.insert((b.clone(), a.clone()), reverse);
            }
        }
        PairMode::Mesh => {
            let members: BTreeSet<NodeId> = graph
                .hosts()
                .map(|n| n.id.clone())
                .chain(extra.iter().filter(|id| graph.node(id).is_some()).cloned())
                .collect();
            let adjacency = adjacency(graph);
            for source in &members {
                pairs.insert((source.clone(), source.clone()), PairMetrics::self_pair(source));
                let tree = widest_shortest_paths(&adjacency, source);
                for target in &members {
                    if target == source {
                        continue;
                    }
                    if let Some(metrics) = tree.path_to(source, target) {
                        pairs.insert((source.clone(), target.clone()), metrics);
                    }
                }
            }
        }
    }
    EligiblePairs { mode, pairs }
}

type Adjacency = BTreeMap<NodeId, Vec<(NodeId, f64, f64)>>;

fn adjacency(graph: &SubstrateGraph) -> Adjacency {
    let mut adj: Adjacency = graph.nodes.iter().map(|n| (n.id.clone(), Vec::new())).collect();
    for link in &graph.links {
        let [a, b] = &link.endpoints;
        if a == b || !adj.contains_key(a) || !adj.contains_key(b) {
            continue;
        }
        adj.get_mut(a).unwrap().push((b.clone(), link.latency, link.bandwidth));
        adj.get_mut(b).unwrap().push((a.clone(), link.latency, link.bandwidth));
    }
    for list in adj.values_mut() {
        list.sort_by(|x, y| x.0.cmp(&y.0));
    }
    adj
}

/// Lexicographic label: lower latency first, then wider bottleneck.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    latency: f64,
    bottleneck: f64,
}

impl Label {
    fn better_than(&self, other: &Label) -> bool {
        self.latency < other.latency || (self.latency == other.latency && self.bottleneck > other.bottleneck)
    }
}

#[derive(Debug, PartialEq)]
struct QueueItem {
    label: Label,
    node: NodeId,
}

impl Eq for QueueItem {}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: the "greatest" item is the best label.
        other
            .label
            .latency
            .total_cmp(&self.label.latency)
            .then(self.label.bottleneck.total_cmp(&other.label.bottleneck))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct PathTree {
    labels: BTreeMap<NodeId, Label>,
    parent: BTreeMap<NodeId, NodeId>,
}

impl PathTree {
    fn path_to(&self, source: &NodeId, target: &NodeId) -> Option<PairMetrics> {
        let label = self.labels.get(target)?;
        let mut path = vec![target.clone()];
        let mut cur = target;
        while cur != source {
            cur = self.parent.get(cur)?;
            path.push(cur.clone());
        }
        path.reverse();
        Some(PairMetrics {
            latency: label.latency,
            bandwidth: label.bottleneck,
            path,
        })
    }
}

// Dijkstra over (latency, -bottleneck) labels. The label order is preserved
// by edge extension, so the greedy settle order stays exact.
fn widest_shortest_paths(adj: &Adjacency, source: &NodeId) -> PathTree {
    let mut labels: BTreeMap<NodeId, Label> = BTreeMap::new();
    let mut parent = BTreeMap::new();
    let mut settled = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    let start = Label {
        latency: 0.0,
        bottleneck: f64::INFINITY,
    };
    labels.insert(source.clone(), start);
    heap.push(QueueItem {
        label: start,
        node: source.clone(),
    });
    while let Some(QueueItem { label, node }) = heap.pop() {
        if !settled.insert(node.clone()) {
            continue;
        }
        for (next, latency, bandwidth) in &adj[&node] {
            if settled.contains(next) {
                continue;
            }
            let candidate = Label {
                latency: label.latency + latency,
                bottleneck: label.bottleneck.min(*bandwidth),
            };
            let improves = labels.get(next).is_none_or(|cur| candidate.better_than(cur));
            if improves {
                labels.insert(next.clone(), candidate);
                parent.insert(next.clone(), node.clone());
                heap.push(QueueItem {
                    label: candidate,
                    node: next.clone(),
                });
            }
        }
    }
    PathTree { labels, parent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeCharacteristics, ResourceVector, SubstrateLink, SubstrateNode};

    fn host(id: &str) -> SubstrateNode {
        SubstrateNode::host(
            id,
            ResourceVector::from_pairs([("cpu", 10.0)]),
            NodeCharacteristics {
                security_level: 0,
                iaas_id: 0,
            },
        )
    }

    fn path_graph() -> SubstrateGraph {
        SubstrateGraph {
            nodes: vec![host("A"), host("B"), host("C")],
            links: vec![SubstrateLink::new("A", "B", 100.0, 2.0), SubstrateLink::new("B", "C", 50.0, 3.0)],
        }
    }

    #[test]
    fn self_pair_is_free() {
        let pairs = eligible_pairs(&path_graph(), PairMode::Direct);
        let m = pairs.get(&"C".into(), &"C".into()).unwrap();
        assert_eq!(m.latency, 0.0);
        assert!(m.bandwidth.is_infinite());
    }

    #[test]
    fn direct_mode_uses_link_weights() {
        let g = SubstrateGraph {
            nodes: vec![host("A"), host("B")],
            links: vec![SubstrateLink::new("A", "B", 10.0, 5.0)],
        };
        let pairs = eligible_pairs(&g, PairMode::Direct);
        let m = pairs.get(&"B".into(), &"A".into()).unwrap();
        assert_eq!((m.latency, m.bandwidth), (5.0, 10.0));
        assert_eq!(pairs.len(), 4);
    }

    #[test]
    fn direct_mode_skips_non_adjacent() {
        let pairs = eligible_pairs(&path_graph(), PairMode::Direct);
        assert!(!pairs.contains(&"A".into(), &"C".into()));
    }

    #[test]
    fn mesh_mode_path_metrics() {
        let pairs = eligible_pairs(&path_graph(), PairMode::Mesh);
        let m = pairs.get(&"A".into(), &"C".into()).unwrap();
        assert_eq!((m.latency, m.bandwidth), (5.0, 50.0));
        assert_eq!(m.path, vec![NodeId::from("A"), "B".into(), "C".into()]);
    }

    #[test]
    fn mesh_prefers_wider_path_among_equal_latency() {
        let g = SubstrateGraph {
            nodes: vec![host("A"), host("B"), host("C"), host("D")],
            links: vec![
                SubstrateLink::new("A", "B", 10.0, 1.0),
                SubstrateLink::new("B", "D", 10.0, 1.0),
                SubstrateLink::new("A", "C", 80.0, 1.0),
                SubstrateLink::new("C", "D", 90.0, 1.0),
            ],
        };
        let pairs = eligible_pairs(&g, PairMode::Mesh);
        let m = pairs.get(&"A".into(), &"D".into()).unwrap();
        assert_eq!((m.latency, m.bandwidth), (2.0, 80.0));
    }

    #[test]
    fn mesh_excludes_connectors_unless_requested() {
        let mut g = path_graph();
        g.nodes.push(SubstrateNode::connector("R", &["cpu"]));
        g.links.push(SubstrateLink::new("C", "R", 10.0, 1.0));
        let pairs = eligible_pairs(&g, PairMode::Mesh);
        assert!(!pairs.contains(&"A".into(), &"R".into()));
        let extra: BTreeSet<NodeId> = [NodeId::from("R")].into_iter().collect();
        let pairs = eligible_pairs_with(&g, PairMode::Mesh, &extra);
        assert_eq!(pairs.get(&"A".into(), &"R".into()).unwrap().latency, 6.0);
    }
}
