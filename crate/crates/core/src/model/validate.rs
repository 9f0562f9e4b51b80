// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{NodeId, NodeKind, PlacementConstraint, ResourceVector, SliceRequest, SubstrateGraph};

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationError {
    /// Identifiers are limited to ASCII letters, digits, `_` and `.`.
    InvalidIdentifier(String),
    DuplicateNode(String),
    DanglingLink(String),
    SelfLoop(String),
    DuplicateLink(String, String),
    NonPositiveBandwidth(String, String),
    NegativeLatency(String, String),
    NegativeQuantity { owner: String, kind: String },
    ResourceKindMismatch(String),
    ConnectorCapacity(String),
    MissingCharacteristics(String),
    Disconnected,
    EmptySlice(String),
    DuplicateSlice(String),
    DuplicateSfc { slice: String, sfc: String },
    EmptyChain { slice: String, sfc: String },
    DuplicateNf { slice: String, sfc: String, nf: String },
    NonPositiveLatencyBudget { slice: String, sfc: String },
    NonPositiveHopBandwidth { slice: String, sfc: String },
    UnknownAuthorizedNode(String),
    AuthorizedNodeNotHost(String),
    UnknownEndpoint(String),
}

impl ValidationError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use ValidationError::*;
        match self {
            InvalidIdentifier(_) => "invalid_identifier",
            DuplicateNode(_) => "duplicate_node",
            DanglingLink(_) => "dangling_link",
            SelfLoop(_) => "self_loop",
            DuplicateLink(..) => "duplicate_link",
            NonPositiveBandwidth(..) => "non_positive_bandwidth",
            NegativeLatency(..) => "negative_latency",
            NegativeQuantity { .. } => "negative_quantity",
            ResourceKindMismatch(_) => "resource_kind_mismatch",
            ConnectorCapacity(_) => "connector_capacity",
            MissingCharacteristics(_) => "missing_characteristics",
            Disconnected => "disconnected",
            EmptySlice(_) => "empty_slice",
            DuplicateSlice(_) => "duplicate_slice",
            DuplicateSfc { .. } => "duplicate_sfc",
            EmptyChain { .. } => "empty_chain",
            DuplicateNf { .. } => "duplicate_nf",
            NonPositiveLatencyBudget { .. } => "non_positive_latency_budget",
            NonPositiveHopBandwidth { .. } => "non_positive_hop_bandwidth",
            UnknownAuthorizedNode(_) => "unknown_authorized_node",
            AuthorizedNodeNotHost(_) => "authorized_node_not_host",
            UnknownEndpoint(_) => "unknown_endpoint",
        }
    }

    /// The offending identifier, when there is one.
    pub fn subject(&self) -> Option<String> {
        use ValidationError::*;
        match self {
            InvalidIdentifier(id)
            | DuplicateNode(id)
            | DanglingLink(id)
            | SelfLoop(id)
            | ResourceKindMismatch(id)
            | ConnectorCapacity(id)
            | MissingCharacteristics(id)
            | EmptySlice(id)
            | DuplicateSlice(id)
            | UnknownAuthorizedNode(id)
            | AuthorizedNodeNotHost(id)
            | UnknownEndpoint(id) => Some(id.clone()),
            DuplicateLink(a, b) | NonPositiveBandwidth(a, b) | NegativeLatency(a, b) => Some(format!("{a}-{b}")),
            NegativeQuantity { owner, .. } => Some(owner.clone()),
            Disconnected => None,
            DuplicateSfc { slice, sfc }
            | EmptyChain { slice, sfc }
            | NonPositiveLatencyBudget { slice, sfc }
            | NonPositiveHopBandwidth { slice, sfc } => Some(format!("{slice}/{sfc}")),
            DuplicateNf { slice, sfc, nf } => Some(format!("{slice}/{sfc}/{nf}")),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subject() {
            Some(subject) => write!(f, "{}: {}", self.code(), subject),
            None => f.write_str(self.code()),
        }
    }
}

impl std::error::Error for ValidationError {}

fn valid_identifier(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Check every structural invariant of a substrate and its requests.
/// Returns all violations found; an empty list means the instance is usable.
pub fn validate(graph: &SubstrateGraph, requests: &[SliceRequest]) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    check_graph(graph, &mut errors);
    check_requests(graph, requests, &mut errors);
    errors
}

fn check_quantities(owner: &str, v: &ResourceVector, errors: &mut Vec<ValidationError>) {
    for (kind, q) in v.iter() {
        if !(q >= 0.0) || !q.is_finite() {
            errors.push(ValidationError::NegativeQuantity {
                owner: owner.to_string(),
                kind: kind.to_string(),
            });
        }
    }
}

fn check_graph(graph: &SubstrateGraph, errors: &mut Vec<ValidationError>) {
    let reference = graph.hosts().next().map(|n| n.capacity.clone());
    let mut ids = BTreeSet::new();
    for node in &graph.nodes {
        if !valid_identifier(node.id.as_str()) {
            errors.push(ValidationError::InvalidIdentifier(node.id.to_string()));
        }
        if !ids.insert(node.id.clone()) {
            errors.push(ValidationError::DuplicateNode(node.id.to_string()));
        }
        check_quantities(node.id.as_str(), &node.capacity, errors);
        match node.kind {
            NodeKind::Host => {
                if node.characteristics.is_none() {
                    errors.push(ValidationError::MissingCharacteristics(node.id.to_string()));
                }
                if let Some(reference) = &reference {
                    if !node.capacity.same_kinds(reference) {
                        errors.push(ValidationError::ResourceKindMismatch(node.id.to_string()));
                    }
                }
            }
            NodeKind::Connector => {
                if !node.capacity.is_zero() {
                    errors.push(ValidationError::ConnectorCapacity(node.id.to_string()));
                }
            }
        }
    }

    let mut seen_pairs = BTreeSet::new();
    let mut adjacency: BTreeMap<&NodeId, Vec<&NodeId>> = ids.iter().map(|id| (id, Vec::new())).collect();
    for link in &graph.links {
        let [a, b] = &link.endpoints;
        let mut dangling = false;
        for end in [a, b] {
            if !ids.contains(end) {
                errors.push(ValidationError::DanglingLink(end.to_string()));
                dangling = true;
            }
        }
        if a == b {
            errors.push(ValidationError::SelfLoop(a.to_string()));
            continue;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if !seen_pairs.insert(key) {
            errors.push(ValidationError::DuplicateLink(key.0.to_string(), key.1.to_string()));
        }
        if !(link.bandwidth > 0.0) {
            errors.push(ValidationError::NonPositiveBandwidth(a.to_string(), b.to_string()));
        }
        if !(link.latency >= 0.0) || !link.latency.is_finite() {
            errors.push(ValidationError::NegativeLatency(a.to_string(), b.to_string()));
        }
        if !dangling {
            adjacency.get_mut(a).unwrap().push(b);
            adjacency.get_mut(b).unwrap().push(a);
        }
    }

    if let Some(start) = ids.iter().next() {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            for next in &adjacency[cur] {
                if seen.insert(*next) {
                    queue.push_back(*next);
                }
            }
        }
        if seen.len() != ids.len() {
            errors.push(ValidationError::Disconnected);
        }
    }
}

fn check_requests(graph: &SubstrateGraph, requests: &[SliceRequest], errors: &mut Vec<ValidationError>) {
    let reference = graph.hosts().next().map(|n| n.capacity.clone());
    let mut slices = BTreeSet::new();
    for req in requests {
        if !valid_identifier(&req.slice_id) {
            errors.push(ValidationError::InvalidIdentifier(req.slice_id.clone()));
        }
        if !slices.insert(req.slice_id.as_str()) {
            errors.push(ValidationError::DuplicateSlice(req.slice_id.clone()));
        }
        if req.sfcs.is_empty() {
            errors.push(ValidationError::EmptySlice(req.slice_id.clone()));
        }
        let mut sfc_ids = BTreeSet::new();
        for sfc in &req.sfcs {
            let (slice, sfc_id) = (req.slice_id.clone(), sfc.id.clone());
            if !valid_identifier(&sfc.id) {
                errors.push(ValidationError::InvalidIdentifier(sfc.id.clone()));
            }
            if !sfc_ids.insert(sfc.id.as_str()) {
                errors.push(ValidationError::DuplicateSfc {
                    slice: slice.clone(),
                    sfc: sfc_id.clone(),
                });
            }
            if sfc.nfs.is_empty() {
                errors.push(ValidationError::EmptyChain {
                    slice: slice.clone(),
                    sfc: sfc_id.clone(),
                });
            }
            if !(sfc.latency_budget > 0.0) {
                errors.push(ValidationError::NonPositiveLatencyBudget {
                    slice: slice.clone(),
                    sfc: sfc_id.clone(),
                });
            }
            if !(sfc.hop_bandwidth > 0.0) || !sfc.hop_bandwidth.is_finite() {
                errors.push(ValidationError::NonPositiveHopBandwidth {
                    slice: slice.clone(),
                    sfc: sfc_id.clone(),
                });
            }
            for end in sfc.ingress.iter().chain(sfc.egress.iter()) {
                if graph.node(end).is_none() {
                    errors.push(ValidationError::UnknownEndpoint(end.to_string()));
                }
            }
            let mut nf_ids = BTreeSet::new();
            for nf in &sfc.nfs {
                if !valid_identifier(&nf.id) {
                    errors.push(ValidationError::InvalidIdentifier(nf.id.clone()));
                }
                if !nf_ids.insert(nf.id.as_str()) {
                    errors.push(ValidationError::DuplicateNf {
                        slice: slice.clone(),
                        sfc: sfc_id.clone(),
                        nf: nf.id.clone(),
                    });
                }
                check_quantities(&nf.id, &nf.demand, errors);
                if let Some(reference) = &reference {
                    if !nf.demand.same_kinds(reference) {
                        errors.push(ValidationError::ResourceKindMismatch(nf.id.clone()));
                    }
                }
                if let PlacementConstraint::Nodes(set) = &nf.placement {
                    for id in set {
                        match graph.node(id) {
                            None => errors.push(ValidationError::UnknownAuthorizedNode(id.to_string())),
                            Some(n) if !n.is_host() => {
                                errors.push(ValidationError::AuthorizedNodeNotHost(id.to_string()))
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NfSpec, NodeCharacteristics, SfcSpec, SubstrateLink, SubstrateNode};

    fn host(id: &str) -> SubstrateNode {
        SubstrateNode::host(
            id,
            ResourceVector::from_pairs([("cpu", 10.0), ("ram", 10.0)]),
            NodeCharacteristics {
                security_level: 1,
                iaas_id: 1,
            },
        )
    }

    fn graph() -> SubstrateGraph {
        SubstrateGraph {
            nodes: vec![host("A"), host("B"), host("C")],
            links: vec![SubstrateLink::new("A", "B", 10.0, 1.0), SubstrateLink::new("B", "C", 10.0, 1.0)],
        }
    }

    fn request(nf: NfSpec) -> SliceRequest {
        SliceRequest {
            slice_id: "S1".into(),
            revision: 1,
            sfcs: vec![SfcSpec {
                id: "f1".into(),
                nfs: vec![nf],
                latency_budget: 10.0,
                hop_bandwidth: 5.0,
                ingress: None,
                egress: None,
            }],
        }
    }

    fn demand() -> ResourceVector {
        ResourceVector::from_pairs([("cpu", 1.0), ("ram", 1.0)])
    }

    #[test]
    fn well_formed_instance_passes() {
        assert!(validate(&graph(), &[request(NfSpec::new("a", demand()))]).is_empty());
    }

    #[test]
    fn dangling_link() {
        let mut g = graph();
        g.links.push(SubstrateLink::new("C", "Z", 10.0, 1.0));
        assert_eq!(validate(&g, &[]), vec![ValidationError::DanglingLink("Z".into())]);
    }

    #[test]
    fn unknown_authorized_node() {
        let nf = NfSpec::new("a", demand()).restricted_to(["B", "X"]);
        assert_eq!(
            validate(&graph(), &[request(nf)]),
            vec![ValidationError::UnknownAuthorizedNode("X".into())]
        );
    }

    #[test]
    fn disconnected_graph() {
        let mut g = graph();
        g.links.pop();
        let errs = validate(&g, &[]);
        assert_eq!(errs, vec![ValidationError::Disconnected]);
        assert_eq!(errs[0].code(), "disconnected");
    }

    #[test]
    fn connector_with_capacity_and_mismatched_kinds() {
        let mut g = graph();
        let mut r = SubstrateNode::connector("R", &["cpu", "ram"]);
        r.capacity.set("cpu", 1.0);
        g.nodes.push(r);
        g.links.push(SubstrateLink::new("R", "A", 10.0, 1.0));
        let nf = NfSpec::new("a", ResourceVector::from_pairs([("cpu", 1.0)]));
        let errs = validate(&g, &[request(nf)]);
        assert!(errs.contains(&ValidationError::ConnectorCapacity("R".into())));
        assert!(errs.contains(&ValidationError::ResourceKindMismatch("a".into())));
    }

    #[test]
    fn chain_invariants() {
        let mut req = request(NfSpec::new("a", demand()));
        req.sfcs[0].latency_budget = 0.0;
        req.sfcs[0].hop_bandwidth = -1.0;
        req.sfcs[0].nfs.push(NfSpec::new("a", demand()));
        let codes: Vec<_> = validate(&graph(), &[req]).iter().map(|e| e.code()).collect();
        assert_eq!(codes, vec!["non_positive_latency_budget", "non_positive_hop_bandwidth", "duplicate_nf"]);
    }

    #[test]
    fn identifiers_must_be_lp_safe() {
        let nf = NfSpec::new("bad name", demand());
        assert_eq!(
            validate(&graph(), &[request(nf)]),
            vec![ValidationError::InvalidIdentifier("bad name".into())]
        );
    }
}
