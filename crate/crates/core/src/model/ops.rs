use std::collections::{BTreeMap, BTreeSet};

use super::{
    chain_positions, eligible_pairs_with, find_sfc, ChainPosition, NfSpec, NodeId, PlacementConstraint,
    PlacementSolution, RoutingConfig, SliceRequest, SubstrateGraph,
};

/// Slack allowed on link bandwidth subtraction before a residual counts as
/// negative.
const BANDWIDTH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("network function `{nf}` has no authorized host")]
    EmptyAuthorizedSet { nf: String },
    #[error("residual capacity of `{node}` in `{kind}` would drop to {value}")]
    NegativeResidual { node: String, kind: String, value: f64 },
    #[error("residual bandwidth of link {a}-{b} would drop to {value}")]
    NegativeLinkResidual { a: String, b: String, value: f64 },
    #[error("solution references `{0}` which is not in the instance")]
    UnknownReference(String),
    #[error("no substrate path for virtual link {0}")]
    Unroutable(String),
}

/// Hosts allowed to run `nf` (the set `y_j`). Connectors are never returned.
pub fn authorized_nodes(nf: &NfSpec, graph: &SubstrateGraph) -> Result<BTreeSet<NodeId>, ModelError> {
    let out: BTreeSet<NodeId> = match &nf.placement {
        PlacementConstraint::Unrestricted => graph.hosts().map(|n| n.id.clone()).collect(),
        PlacementConstraint::Nodes(set) => graph
            .hosts()
            .filter(|n| set.contains(&n.id))
            .map(|n| n.id.clone())
            .collect(),
        PlacementConstraint::Filter { iaas_ids, min_security } => graph
            .hosts()
            .filter(|n| {
                let Some(c) = n.characteristics else {
                    return false;
                };
                iaas_ids.as_ref().is_none_or(|ids| ids.contains(&c.iaas_id))
                    && min_security.is_none_or(|min| c.security_level >= min)
            })
            .map(|n| n.id.clone())
            .collect(),
    };
    if out.is_empty() {
        return Err(ModelError::EmptyAuthorizedSet { nf: nf.id.clone() });
    }
    Ok(out)
}

/// Total number of network functions across all requests.
pub fn gamma(requests: &[SliceRequest]) -> usize {
    requests
        .iter()
        .flat_map(|r| &r.sfcs)
        .map(|c| c.nfs.len())
        .sum()
}

/// Subtract the resources consumed by `solution` from `graph`.
///
/// Node capacities lose the demand of every function placed on them; each
/// physical link loses the hop bandwidth of every virtual link routed across
/// it (along the pair's substrate path). Self-pairs consume nothing and
/// latencies are left untouched.
pub fn residual_apply(
    graph: &SubstrateGraph,
    requests: &[SliceRequest],
    solution: &PlacementSolution,
    routing: &RoutingConfig,
) -> Result<SubstrateGraph, ModelError> {
    let mut out = graph.clone();

    for (key, node_id) in &solution.assignment {
        let (_, nf) = requests
            .iter()
            .find(|r| r.slice_id == key.slice)
            .and_then(|r| r.find_nf(&key.sfc, &key.nf))
            .ok_or_else(|| ModelError::UnknownReference(key.to_string()))?;
        let node = out
            .node_mut(node_id)
            .ok_or_else(|| ModelError::UnknownReference(node_id.to_string()))?;
        for (kind, demand) in nf.demand.iter() {
            let left = node.capacity.get(kind) - demand;
            if left < 0.0 {
                return Err(ModelError::NegativeResidual {
                    node: node_id.to_string(),
                    kind: kind.to_string(),
                    value: left,
                });
            }
            node.capacity.set(kind, left);
        }
    }

    let extra: BTreeSet<NodeId> = solution
        .routing
        .values()
        .flat_map(|(u, v)| [u.clone(), v.clone()])
        .filter(|id| graph.node(id).is_some_and(|n| !n.is_host()))
        .collect();
    let pairs = eligible_pairs_with(graph, routing.mode, &extra);

    let mut consumed: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for (hop, (u, v)) in &solution.routing {
        if u == v {
            continue;
        }
        let sfc = find_sfc(requests, &hop.slice, &hop.sfc)
            .ok_or_else(|| ModelError::UnknownReference(hop.to_string()))?;
        let metrics = pairs
            .get(u, v)
            .ok_or_else(|| ModelError::Unroutable(hop.to_string()))?;
        for step in metrics.path.windows(2) {
            let key = ordered(&step[0], &step[1]);
            *consumed.entry(key).or_default() += sfc.hop_bandwidth;
        }
    }
    for ((a, b), used) in consumed {
        let link = out
            .link_mut(&a, &b)
            .ok_or_else(|| ModelError::Unroutable(format!("{a}-{b}")))?;
        let left = link.bandwidth - used;
        if left < -BANDWIDTH_TOL {
            return Err(ModelError::NegativeLinkResidual {
                a: a.to_string(),
                b: b.to_string(),
                value: left,
            });
        }
        link.bandwidth = left.max(0.0);
    }
    Ok(out)
}

fn ordered(a: &NodeId, b: &NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Nodes named as chain endpoints when endpoints are pinned.
pub(crate) fn pinned_endpoints(requests: &[SliceRequest], routing: &RoutingConfig) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    if !routing.pin_endpoints {
        return out;
    }
    for sfc in requests.iter().flat_map(|r| &r.sfcs) {
        for pos in chain_positions(sfc, routing) {
            match pos {
                ChainPosition::Ingress(id) | ChainPosition::Egress(id) => {
                    out.insert(id.clone());
                }
                ChainPosition::Nf(_) => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        HopKey, NfKey, NodeCharacteristics, ResourceVector, SfcSpec, SolveStatus, SubstrateLink, SubstrateNode,
    };

    fn host(id: &str, iaas: u32, sec: u8) -> SubstrateNode {
        SubstrateNode::host(
            id,
            ResourceVector::from_pairs([("cpu", 10.0)]),
            NodeCharacteristics {
                security_level: sec,
                iaas_id: iaas,
            },
        )
    }

    fn six_dc() -> SubstrateGraph {
        let mut nodes: Vec<_> = ["A", "B", "C", "D", "E", "F"].iter().map(|id| host(id, 1, 1)).collect();
        nodes.push(SubstrateNode::connector("G", &["cpu"]));
        nodes.push(SubstrateNode::connector("H", &["cpu"]));
        SubstrateGraph { nodes, links: vec![] }
    }

    #[test]
    fn explicit_set_is_returned() {
        let nf = NfSpec::new("r", ResourceVector::new()).restricted_to(["B", "C", "F"]);
        let got = authorized_nodes(&nf, &six_dc()).unwrap();
        assert_eq!(got, ["B", "C", "F"].iter().map(|s| NodeId::from(*s)).collect());
    }

    #[test]
    fn unrestricted_skips_connectors() {
        let nf = NfSpec::new("x", ResourceVector::new());
        let got = authorized_nodes(&nf, &six_dc()).unwrap();
        assert_eq!(got.len(), 6);
        assert!(!got.contains(&NodeId::from("G")));
    }

    #[test]
    fn iaas_filter() {
        let g = SubstrateGraph {
            nodes: vec![host("n1", 1, 0), host("n2", 2, 0), host("n5", 5, 0), host("n9", 9, 0)],
            links: vec![],
        };
        let mut nf = NfSpec::new("x", ResourceVector::new());
        nf.placement = PlacementConstraint::Filter {
            iaas_ids: Some([2, 5, 7].into_iter().collect()),
            min_security: None,
        };
        let got = authorized_nodes(&nf, &g).unwrap();
        assert_eq!(got, ["n2", "n5"].iter().map(|s| NodeId::from(*s)).collect());
    }

    #[test]
    fn security_filter_and_empty_set() {
        let g = SubstrateGraph {
            nodes: vec![host("a", 1, 1), host("b", 1, 3)],
            links: vec![],
        };
        let mut nf = NfSpec::new("x", ResourceVector::new());
        nf.placement = PlacementConstraint::Filter {
            iaas_ids: None,
            min_security: Some(2),
        };
        assert_eq!(authorized_nodes(&nf, &g).unwrap().len(), 1);
        nf.placement = PlacementConstraint::Filter {
            iaas_ids: None,
            min_security: Some(4),
        };
        assert!(matches!(authorized_nodes(&nf, &g), Err(ModelError::EmptyAuthorizedSet { .. })));
    }

    fn chain(slice_nfs: usize) -> SfcSpec {
        SfcSpec {
            id: "f1".into(),
            nfs: (0..slice_nfs)
                .map(|i| NfSpec::new(format!("n{i}"), ResourceVector::from_pairs([("cpu", 5.0)])))
                .collect(),
            latency_budget: 31.0,
            hop_bandwidth: 10.0,
            ingress: None,
            egress: None,
        }
    }

    #[test]
    fn gamma_counts_functions() {
        assert_eq!(gamma(&[]), 0);
        let req = SliceRequest {
            slice_id: "S1".into(),
            revision: 1,
            sfcs: vec![chain(3)],
        };
        assert_eq!(gamma(std::slice::from_ref(&req)), 3);
        let many: Vec<_> = (0..5)
            .map(|s| SliceRequest {
                slice_id: format!("s{s}"),
                revision: 1,
                sfcs: vec![chain(20), chain(20)],
            })
            .collect();
        assert_eq!(gamma(&many), 200);
    }

    fn line() -> SubstrateGraph {
        SubstrateGraph {
            nodes: vec![host("F", 1, 1), host("G", 1, 1), host("H", 1, 1)],
            links: vec![SubstrateLink::new("F", "G", 50.0, 10.0), SubstrateLink::new("G", "H", 40.0, 10.0)],
        }
    }

    #[test]
    fn residual_subtracts_routed_bandwidth() {
        let req = SliceRequest {
            slice_id: "S1".into(),
            revision: 1,
            sfcs: vec![chain(3)],
        };
        let mut sol = PlacementSolution::empty(SolveStatus::Optimal);
        for (i, node) in ["F", "G", "H"].iter().enumerate() {
            sol.assignment.insert(NfKey::new("S1", "f1", format!("n{i}")), NodeId::from(*node));
        }
        sol.routing.insert(HopKey::new("S1", "f1", 1), ("F".into(), "G".into()));
        sol.routing.insert(HopKey::new("S1", "f1", 2), ("G".into(), "H".into()));
        sol.refresh_active();
        let out = residual_apply(&line(), &[req], &sol, &RoutingConfig::default()).unwrap();
        assert_eq!(out.link(&"F".into(), &"G".into()).unwrap().bandwidth, 40.0);
        assert_eq!(out.link(&"G".into(), &"H".into()).unwrap().bandwidth, 30.0);
        assert_eq!(out.link(&"G".into(), &"H".into()).unwrap().latency, 10.0);
        assert_eq!(out.node(&"G".into()).unwrap().capacity.get("cpu"), 5.0);
    }

    #[test]
    fn residual_of_empty_solution_is_identity() {
        let sol = PlacementSolution::empty(SolveStatus::Optimal);
        let out = residual_apply(&line(), &[], &sol, &RoutingConfig::default()).unwrap();
        assert_eq!(out, line());
    }

    #[test]
    fn residual_rejects_overdraw() {
        let mut g = line();
        g.node_mut(&"F".into()).unwrap().capacity.set("cpu", 3.0);
        let req = SliceRequest {
            slice_id: "S1".into(),
            revision: 1,
            sfcs: vec![chain(1)],
        };
        let mut sol = PlacementSolution::empty(SolveStatus::Optimal);
        sol.assignment.insert(NfKey::new("S1", "f1", "n0"), "F".into());
        let err = residual_apply(&g, &[req], &sol, &RoutingConfig::default()).unwrap_err();
        assert!(matches!(err, ModelError::NegativeResidual { .. }));
    }
}
