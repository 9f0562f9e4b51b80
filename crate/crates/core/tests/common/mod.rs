//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netslice_core::io::{Instance, RequestSequence};
use netslice_core::model::{
    authorized_nodes, chain_positions, eligible_pairs_with, ChainPosition, HopKey, NfKey, NfSpec, NodeCharacteristics,
    NodeId, PairMode, PlacementConstraint, PlacementSolution, ResourceVector, RoutingConfig, SfcSpec, SliceRequest,
    SolveStatus, SubstrateGraph, SubstrateLink, SubstrateNode,
};
use netslice_core::verify::Family;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn fixture(name: &str) -> Instance {
    Instance::load(data_path(name)).expect("fixture loads")
}

pub fn sequence(name: &str) -> RequestSequence {
    RequestSequence::load(data_path(name)).expect("sequence loads")
}

/// A small random instance with its routing configuration.
#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub graph: SubstrateGraph,
    pub requests: Vec<SliceRequest>,
    pub routing: RoutingConfig,
}

impl Case {
    pub fn hosts(&self) -> usize {
        self.graph.hosts().count()
    }

    pub fn functions(&self) -> usize {
        self.requests.iter().flat_map(|r| &r.sfcs).map(|c| c.nfs.len()).sum()
    }
}

/// At most 5 nodes and 6 functions. With `force_cross`, the first two
/// functions of the first chain are pinned to the two ends of a physical
/// link, so every feasible placement routes a hop across nodes.
pub fn small_case(seed: u64, force_cross: bool) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_hosts = rng.gen_range(2..=5);
    let n_connectors = if n_hosts < 5 { rng.gen_range(0..=1) } else { 0 };
    let with_ram = rng.gen_bool(0.5);
    let kinds: Vec<&str> = if with_ram { vec!["cpu", "ram"] } else { vec!["cpu"] };

    let mut nodes = Vec::new();
    for i in 1..=n_hosts {
        let cap = ResourceVector::from_pairs(kinds.iter().map(|k| (*k, rng.gen_range(4..=10) as f64)));
        let chars = NodeCharacteristics {
            security_level: rng.gen_range(1..=3),
            iaas_id: rng.gen_range(1..=2),
        };
        nodes.push(SubstrateNode::host(format!("v{i}"), cap, chars));
    }
    for i in 1..=n_connectors {
        nodes.push(SubstrateNode::connector(format!("r{i}"), &kinds));
    }

    // A random spanning path keeps the graph connected.
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.shuffle(&mut rng);
    let mut edges: BTreeSet<(usize, usize)> = order.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if rng.gen_bool(0.4) {
                edges.insert((a, b));
            }
        }
    }
    let links: Vec<SubstrateLink> = edges
        .iter()
        .map(|&(a, b)| {
            SubstrateLink::new(
                nodes[a].id.as_str(),
                nodes[b].id.as_str(),
                rng.gen_range(2..=10) as f64,
                rng.gen_range(1..=5) as f64,
            )
        })
        .collect();

    let gamma = rng.gen_range(if force_cross { 2 } else { 1 }..=6);
    let n_chains = rng.gen_range(1..=gamma.min(3));
    let mut lengths = vec![1; n_chains];
    for _ in n_chains..gamma {
        let c = rng.gen_range(0..n_chains);
        lengths[c] += 1;
    }
    if force_cross && lengths[0] < 2 {
        let donor = (1..n_chains).find(|&c| lengths[c] > 1).unwrap_or(1);
        lengths[donor] -= 1;
        lengths[0] += 1;
        if lengths[donor] == 0 {
            lengths.remove(donor);
        }
    }

    let host_ids: Vec<NodeId> = nodes.iter().filter(|n| n.is_host()).map(|n| n.id.clone()).collect();
    let all_ids: Vec<NodeId> = nodes.iter().map(|n| n.id.clone()).collect();
    let pin_endpoints = rng.gen_bool(0.2);
    let mut chains = Vec::new();
    for (c, &len) in lengths.iter().enumerate() {
        let nfs = (1..=len)
            .map(|j| {
                let demand = ResourceVector::from_pairs(kinds.iter().map(|k| (*k, rng.gen_range(1..=5) as f64)));
                let mut nf = NfSpec::new(format!("j{j}"), demand);
                nf.placement = match rng.gen_range(0..20) {
                    0..=11 => PlacementConstraint::Unrestricted,
                    12..=16 => {
                        let k = rng.gen_range(1..=host_ids.len());
                        PlacementConstraint::Nodes(host_ids.choose_multiple(&mut rng, k).cloned().collect())
                    }
                    _ => PlacementConstraint::Filter {
                        iaas_ids: None,
                        min_security: Some(rng.gen_range(1..=2)),
                    },
                };
                nf
            })
            .collect();
        let endpoint = |rng: &mut ChaCha8Rng| rng.gen_bool(0.5).then(|| all_ids.choose(rng).unwrap().clone());
        chains.push(SfcSpec {
            id: format!("f{}", c + 1),
            nfs,
            latency_budget: rng.gen_range(1..=15) as f64,
            hop_bandwidth: rng.gen_range(1..=6) as f64,
            ingress: endpoint(&mut rng),
            egress: endpoint(&mut rng),
        });
    }
    if force_cross {
        let link = &links[rng.gen_range(0..links.len())];
        let ends = &link.endpoints;
        let hostlike = |id: &NodeId| host_ids.contains(id);
        // Fall back to any two distinct hosts when the link touches a connector.
        let (a, b) = if hostlike(&ends[0]) && hostlike(&ends[1]) {
            (ends[0].clone(), ends[1].clone())
        } else {
            (host_ids[0].clone(), host_ids[1].clone())
        };
        chains[0].nfs[0].placement = PlacementConstraint::Nodes([a].into());
        chains[0].nfs[1].placement = PlacementConstraint::Nodes([b].into());
        chains[0].latency_budget += 5.0;
    }

    let mut requests = Vec::new();
    let n_slices = rng.gen_range(1..=chains.len().min(2));
    let split = rng.gen_range(1..=chains.len() - (n_slices - 1));
    let mut rest = chains;
    let tail = rest.split_off(split);
    requests.push(SliceRequest {
        slice_id: "s1".into(),
        revision: 1,
        sfcs: rest,
    });
    if n_slices == 2 && !tail.is_empty() {
        requests.push(SliceRequest {
            slice_id: "s2".into(),
            revision: 1,
            sfcs: tail,
        });
    } else if !tail.is_empty() {
        requests[0].sfcs.extend(tail);
    }
    for req in &mut requests {
        for (i, sfc) in req.sfcs.iter_mut().enumerate() {
            sfc.id = format!("f{}", i + 1);
        }
    }

    let mode = if rng.gen_bool(0.3) { PairMode::Mesh } else { PairMode::Direct };
    Case {
        seed,
        graph: SubstrateGraph { nodes, links },
        requests,
        routing: RoutingConfig { mode, pin_endpoints },
    }
}

/// Every complete assignment of authorized nodes, each with the routing and
/// allotments it implies (allotment = pair latency; 0 for ineligible pairs).
/// Enumerated independently of the solver crate's own oracle.
pub fn all_assignments(graph: &SubstrateGraph, requests: &[SliceRequest], routing: &RoutingConfig) -> Vec<PlacementSolution> {
    let mut keys = Vec::new();
    let mut domains = Vec::new();
    for req in requests {
        for sfc in &req.sfcs {
            for nf in &sfc.nfs {
                keys.push(NfKey::new(&req.slice_id, &sfc.id, &nf.id));
                domains.push(authorized_nodes(nf, graph).map(|s| s.into_iter().collect_vec()).unwrap_or_default());
            }
        }
    }
    let endpoints: BTreeSet<NodeId> = if routing.pin_endpoints {
        requests
            .iter()
            .flat_map(|r| &r.sfcs)
            .flat_map(|c| [c.ingress.clone(), c.egress.clone()])
            .flatten()
            .collect()
    } else {
        BTreeSet::new()
    };
    let pairs = eligible_pairs_with(graph, routing.mode, &endpoints);
    domains
        .into_iter()
        .multi_cartesian_product()
        .map(|choice| {
            let mut sol = PlacementSolution::empty(SolveStatus::Optimal);
            for (k, v) in keys.iter().zip(choice) {
                sol.assignment.insert(k.clone(), v);
            }
            for req in requests {
                for sfc in &req.sfcs {
                    let nodes: Vec<NodeId> = chain_positions(sfc, routing)
                        .into_iter()
                        .map(|p| match p {
                            ChainPosition::Nf(i) => {
                                sol.assignment[&NfKey::new(&req.slice_id, &sfc.id, &sfc.nfs[i].id)].clone()
                            }
                            ChainPosition::Ingress(id) | ChainPosition::Egress(id) => id.clone(),
                        })
                        .collect();
                    for (h, w) in nodes.windows(2).enumerate() {
                        let key = HopKey::new(&req.slice_id, &sfc.id, h + 1);
                        let lat = pairs.get(&w[0], &w[1]).map_or(0.0, |m| m.latency);
                        sol.routing.insert(key.clone(), (w[0].clone(), w[1].clone()));
                        sol.hop_latency_budget.insert(key, lat);
                    }
                }
            }
            sol.refresh_active();
            sol
        })
        .collect()
}

/// One broken copy of a feasible placement.
pub struct Mutation {
    pub name: &'static str,
    pub target: Family,
    pub requests: Vec<SliceRequest>,
    pub solution: PlacementSolution,
}

/// Mutations that each break a single family of a feasible `solution`.
/// Needs a hop routed across two distinct nodes.
pub fn single_family_mutations(requests: &[SliceRequest], solution: &PlacementSolution) -> Vec<Mutation> {
    let mut out = Vec::new();
    let unchanged = |name, target, solution| Mutation {
        name,
        target,
        requests: requests.to_vec(),
        solution,
    };

    let mut s = solution.clone();
    s.objective += 1;
    out.push(unchanged("objective off by one", Family::Placement, s));

    let first_nf = solution.assignment.keys().next().expect("a placed function");
    let mut r = requests.to_vec();
    let req = r.iter_mut().find(|q| q.slice_id == first_nf.slice).unwrap();
    let sfc = req.sfcs.iter_mut().find(|c| c.id == first_nf.sfc).unwrap();
    let nf = sfc.nfs.iter_mut().find(|f| f.id == first_nf.nf).unwrap();
    let kind = nf.demand.kinds().next().unwrap().to_string();
    nf.demand.set(kind, 1e6);
    out.push(Mutation {
        name: "demand beyond capacity",
        target: Family::Resource,
        requests: r,
        solution: solution.clone(),
    });

    let mut s = solution.clone();
    let any = s.active_nodes.iter().next().unwrap().clone();
    s.routing.insert(HopKey::new("ghost", "f1", 1), (any.clone(), any));
    out.push(unchanged("routing for an unknown hop", Family::Link, s));

    let (cross, _) = solution
        .routing
        .iter()
        .find(|(_, (u, v))| u != v)
        .expect("a hop across two nodes");
    let mut s = solution.clone();
    s.routing.remove(cross);
    out.push(unchanged("hop left unrouted", Family::Link, s));

    let mut s = solution.clone();
    *s.hop_latency_budget.get_mut(cross).unwrap() += 1e3;
    out.push(unchanged("allotment beyond budget", Family::Latency, s));

    let mut r = requests.to_vec();
    let req = r.iter_mut().find(|q| q.slice_id == cross.slice).unwrap();
    req.sfcs.iter_mut().find(|c| c.id == cross.sfc).unwrap().hop_bandwidth = 1e6;
    out.push(Mutation {
        name: "hop bandwidth beyond pair capacity",
        target: Family::Bandwidth,
        requests: r,
        solution: solution.clone(),
    });
    out
}
