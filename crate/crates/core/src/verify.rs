//! Independent feasibility checking of placements.
//!
//! The checks work on domain quantities (demands, capacities, pair latencies
//! and bandwidths), not on the linearized rows of the mixed-integer model,
//! so a faulty linearization cannot hide behind a matching faulty check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{
    authorized_nodes, eligible_pairs_with, HopKey, NfKey, NodeId, PlacementSolution, RoutingConfig, SliceRequest,
    SubstrateGraph,
};

/// Slack on latency and bandwidth sums.
pub const LINK_TOLERANCE: f64 = 1e-6;
/// Slack on resource sums; absorbs summation-order rounding only.
pub const RESOURCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Placement,
    Resource,
    Link,
    Latency,
    Bandwidth,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Placement,
        Family::Resource,
        Family::Link,
        Family::Latency,
        Family::Bandwidth,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Placement => "PLACEMENT",
            Family::Resource => "RESOURCE",
            Family::Link => "LINK",
            Family::Latency => "LATENCY",
            Family::Bandwidth => "BANDWIDTH",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    /// First violation found, in a stable iteration order.
    Fail { violation: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub families: BTreeMap<Family, Verdict>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn verdict(&self, family: Family) -> &Verdict {
        &self.families[&family]
    }

    pub fn failed(&self) -> Vec<Family> {
        self.families
            .iter()
            .filter(|(_, v)| !v.passed())
            .map(|(f, _)| *f)
            .collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (family, verdict) in &self.families {
            match verdict {
                Verdict::Pass => writeln!(f, "{family}: PASS")?,
                Verdict::Fail { violation } => writeln!(f, "{family}: FAIL ({violation})")?,
            }
        }
        write!(f, "overall: {}", if self.overall { "PASS" } else { "FAIL" })
    }
}

/// One virtual link: the chain it belongs to and the nodes its two ends must
/// sit on (`None` where a function is unassigned).
struct ExpectedHop<'a> {
    key: HopKey,
    budget: f64,
    bandwidth: f64,
    from: Option<&'a NodeId>,
    to: Option<&'a NodeId>,
}

/// Check `solution` against every constraint family.
pub fn verify(
    graph: &SubstrateGraph,
    requests: &[SliceRequest],
    solution: &PlacementSolution,
    config: &RoutingConfig,
) -> VerificationReport {
    let mut families = BTreeMap::new();
    families.insert(Family::Placement, check_placement(graph, requests, solution));
    families.insert(Family::Resource, check_resources(graph, requests, solution));

    let hops = expected_hops(requests, solution, config);
    let endpoints: BTreeSet<NodeId> = hops
        .iter()
        .flat_map(|h| [h.from, h.to])
        .flatten()
        .filter(|id| graph.node(id).is_some_and(|n| !n.is_host()))
        .cloned()
        .collect();
    let pairs = eligible_pairs_with(graph, config.mode, &endpoints);

    families.insert(Family::Link, check_links(&hops, solution, &pairs));
    families.insert(Family::Latency, check_latency(&hops, solution, &pairs));
    families.insert(Family::Bandwidth, check_bandwidth(&hops, solution, &pairs));

    let overall = families.values().all(Verdict::passed);
    VerificationReport { families, overall }
}

fn fail(violation: String) -> Verdict {
    Verdict::Fail { violation }
}

fn check_placement(graph: &SubstrateGraph, requests: &[SliceRequest], solution: &PlacementSolution) -> Verdict {
    let mut expected = BTreeSet::new();
    for req in requests {
        for sfc in &req.sfcs {
            for nf in &sfc.nfs {
                let key = NfKey::new(&req.slice_id, &sfc.id, &nf.id);
                let Some(node) = solution.assignment.get(&key) else {
                    return fail(format!("{key} is not assigned"));
                };
                let allowed = authorized_nodes(nf, graph).unwrap_or_default();
                if !allowed.contains(node) {
                    return fail(format!("{key} is on unauthorized node {node}"));
                }
                if !solution.active_nodes.contains(node) {
                    return fail(format!("{node} hosts {key} but is not active"));
                }
                expected.insert(key);
            }
        }
    }
    if let Some(extra) = solution.assignment.keys().find(|k| !expected.contains(*k)) {
        return fail(format!("{extra} is not part of any request"));
    }
    if let Some(ghost) = solution.active_nodes.iter().find(|v| graph.node(v).is_none()) {
        return fail(format!("active node {ghost} does not exist"));
    }
    if solution.objective != solution.active_nodes.len() {
        return fail(format!(
            "objective {} differs from {} active nodes",
            solution.objective,
            solution.active_nodes.len()
        ));
    }
    Verdict::Pass
}

fn check_resources(graph: &SubstrateGraph, requests: &[SliceRequest], solution: &PlacementSolution) -> Verdict {
    let mut load: BTreeMap<(&NodeId, &str), f64> = BTreeMap::new();
    for (key, node) in &solution.assignment {
        let Some((_, nf)) = requests
            .iter()
            .find(|r| r.slice_id == key.slice)
            .and_then(|r| r.find_nf(&key.sfc, &key.nf))
        else {
            continue;
        };
        for (kind, demand) in nf.demand.iter() {
            *load.entry((node, kind)).or_default() += demand;
        }
    }
    for ((node, kind), used) in load {
        let cap = graph.node(node).map_or(0.0, |n| n.capacity.get(kind));
        if used > cap + RESOURCE_TOLERANCE {
            return fail(format!("{node} uses {used} {kind} of {cap}"));
        }
    }
    Verdict::Pass
}

fn expected_hops<'a>(
    requests: &'a [SliceRequest],
    solution: &'a PlacementSolution,
    config: &RoutingConfig,
) -> Vec<ExpectedHop<'a>> {
    let mut out = Vec::new();
    for req in requests {
        for sfc in &req.sfcs {
            let mut ends: Vec<Option<&NodeId>> = Vec::new();
            if config.pin_endpoints {
                if let Some(ingress) = &sfc.ingress {
                    ends.push(Some(ingress));
                }
            }
            for nf in &sfc.nfs {
                ends.push(solution.assignment.get(&NfKey::new(&req.slice_id, &sfc.id, &nf.id)));
            }
            if config.pin_endpoints {
                if let Some(egress) = &sfc.egress {
                    ends.push(Some(egress));
                }
            }
            for (h, pair) in ends.windows(2).enumerate() {
                out.push(ExpectedHop {
                    key: HopKey::new(&req.slice_id, &sfc.id, h + 1),
                    budget: sfc.latency_budget,
                    bandwidth: sfc.hop_bandwidth,
                    from: pair[0],
                    to: pair[1],
                });
            }
        }
    }
    out
}

fn check_links(hops: &[ExpectedHop], solution: &PlacementSolution, pairs: &crate::model::EligiblePairs) -> Verdict {
    for hop in hops {
        let Some((u, v)) = solution.routing.get(&hop.key) else {
            return fail(format!("{} is not routed", hop.key));
        };
        if hop.from != Some(u) || hop.to != Some(v) {
            return fail(format!("{} routed on ({u}, {v}) which does not join its functions' hosts", hop.key));
        }
        if !pairs.contains(u, v) {
            return fail(format!("{} routed on ineligible pair ({u}, {v})", hop.key));
        }
    }
    let known: BTreeSet<&HopKey> = hops.iter().map(|h| &h.key).collect();
    if let Some(extra) = solution.routing.keys().find(|k| !known.contains(k)) {
        return fail(format!("{extra} is not a virtual link of any request"));
    }
    Verdict::Pass
}

fn check_latency(hops: &[ExpectedHop], solution: &PlacementSolution, pairs: &crate::model::EligiblePairs) -> Verdict {
    let mut per_chain: BTreeMap<(&str, &str), (f64, f64)> = BTreeMap::new();
    for hop in hops {
        let Some(&allotted) = solution.hop_latency_budget.get(&hop.key) else {
            return fail(format!("{} has no latency allotment", hop.key));
        };
        if allotted < -LINK_TOLERANCE {
            return fail(format!("{} has negative allotment {allotted}", hop.key));
        }
        if let Some(metrics) = solution.routing.get(&hop.key).and_then(|(u, v)| pairs.get(u, v)) {
            if metrics.latency > allotted + LINK_TOLERANCE {
                return fail(format!(
                    "{} pair latency {} exceeds allotment {allotted}",
                    hop.key, metrics.latency
                ));
            }
        }
        let entry = per_chain
            .entry((hop.key.slice.as_str(), hop.key.sfc.as_str()))
            .or_insert((0.0, hop.budget));
        entry.0 += allotted;
    }
    for ((slice, sfc), (total, budget)) in per_chain {
        if total > budget + LINK_TOLERANCE {
            return fail(format!("chain {slice}/{sfc} allots {total} ms of {budget}"));
        }
    }
    Verdict::Pass
}

fn check_bandwidth(
    hops: &[ExpectedHop],
    solution: &PlacementSolution,
    pairs: &crate::model::EligiblePairs,
) -> Verdict {
    let mut load: BTreeMap<(&NodeId, &NodeId), f64> = BTreeMap::new();
    for hop in hops {
        let Some((u, v)) = solution.routing.get(&hop.key) else {
            continue;
        };
        if u == v || !pairs.contains(u, v) {
            continue;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        *load.entry(key).or_default() += hop.bandwidth;
    }
    for ((u, v), used) in load {
        let cap = pairs.get(u, v).map_or(0.0, |m| m.bandwidth);
        if used > cap + LINK_TOLERANCE {
            return fail(format!("pair ({u}, {v}) carries {used} Mbps of {cap}"));
        }
    }
    Verdict::Pass
}
