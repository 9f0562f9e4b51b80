use std::collections::BTreeMap;

use crate::model::{
    authorized_nodes, chain_positions, eligible_pairs_with, ChainPosition, EligiblePairs, HopKey, NfKey, NodeId,
    RoutingConfig, SfcSpec, SliceRequest, SubstrateGraph,
};

use super::{ConstraintFamily, LinearConstraint, MilpModel, MilpVariable, Relation, VarId, VarKey, VarKind, VariableIndex};

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    pub routing: RoutingConfig,
    /// Refuse to build models with more variables than this.
    pub max_variables: usize,
    /// Multiplier applied to the computed big-M.
    pub big_m_scale: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            routing: RoutingConfig::default(),
            max_variables: 5_000_000,
            big_m_scale: 1.0,
        }
    }
}

impl BuildConfig {
    pub fn with_routing(routing: RoutingConfig) -> Self {
        BuildConfig {
            routing,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("network function {nf} has no authorized host")]
    EmptyAuthorizedSet { nf: NfKey },
    #[error("virtual link {hop} has no eligible node pair between its endpoints' authorized sets")]
    Unroutable { hop: HopKey },
    #[error("model would have {variables} variables (limit {limit})")]
    ModelTooLarge { variables: usize, limit: usize },
}

/// Instance-scaled big-M: twice the largest of the chain latency budgets,
/// pair latencies, total hop bandwidth and pair bandwidths.
pub fn big_m(graph: &SubstrateGraph, requests: &[SliceRequest], config: &BuildConfig) -> f64 {
    let pairs = pairs_for(graph, requests, &config.routing);
    big_m_with(&pairs, requests, &config.routing) * config.big_m_scale
}

fn big_m_with(pairs: &EligiblePairs, requests: &[SliceRequest], routing: &RoutingConfig) -> f64 {
    let sfcs = || requests.iter().flat_map(|r| &r.sfcs);
    let max_budget = sfcs().map(|c| c.latency_budget).fold(0.0, f64::max);
    let total_bandwidth: f64 = sfcs()
        .map(|c| chain_positions(c, routing).len().saturating_sub(1) as f64 * c.hop_bandwidth)
        .sum();
    2.0 * max_budget
        .max(pairs.max_latency())
        .max(total_bandwidth)
        .max(pairs.max_bandwidth())
}

fn pairs_for(graph: &SubstrateGraph, requests: &[SliceRequest], routing: &RoutingConfig) -> EligiblePairs {
    let endpoints = crate::model::pinned_endpoints(requests, routing);
    eligible_pairs_with(graph, routing.mode, &endpoints)
}

/// Candidate hosts of one chain position; `fixed` for pinned endpoints.
struct Slot {
    nodes: Vec<NodeId>,
    nf: Option<NfKey>,
}

struct HopPlan {
    key: HopKey,
    prev: usize,
    next: usize,
    pairs: Vec<(NodeId, NodeId)>,
}

struct ChainPlan<'a> {
    sfc: &'a SfcSpec,
    slots: Vec<Slot>,
    hops: Vec<HopPlan>,
}

fn plan_chains<'a>(
    graph: &SubstrateGraph,
    requests: &'a [SliceRequest],
    routing: &RoutingConfig,
    pairs: &EligiblePairs,
) -> Result<Vec<ChainPlan<'a>>, BuildError> {
    let mut plans = Vec::new();
    for req in requests {
        for sfc in &req.sfcs {
            let mut slots = Vec::new();
            for pos in chain_positions(sfc, routing) {
                slots.push(match pos {
                    ChainPosition::Nf(i) => {
                        let nf = &sfc.nfs[i];
                        let key = NfKey::new(&req.slice_id, &sfc.id, &nf.id);
                        let nodes = authorized_nodes(nf, graph)
                            .map_err(|_| BuildError::EmptyAuthorizedSet { nf: key.clone() })?;
                        Slot {
                            nodes: nodes.into_iter().collect(),
                            nf: Some(key),
                        }
                    }
                    ChainPosition::Ingress(id) | ChainPosition::Egress(id) => Slot {
                        nodes: vec![id.clone()],
                        nf: None,
                    },
                });
            }
            let mut hops = Vec::new();
            for next in 1..slots.len() {
                let prev = next - 1;
                let key = HopKey::new(&req.slice_id, &sfc.id, next);
                let mut candidates = Vec::new();
                for u in &slots[prev].nodes {
                    for v in &slots[next].nodes {
                        if pairs.contains(u, v) {
                            candidates.push((u.clone(), v.clone()));
                        }
                    }
                }
                if candidates.is_empty() {
                    return Err(BuildError::Unroutable { hop: key });
                }
                hops.push(HopPlan {
                    key,
                    prev,
                    next,
                    pairs: candidates,
                });
            }
            plans.push(ChainPlan { sfc, slots, hops });
        }
    }
    Ok(plans)
}

struct Builder {
    index: VariableIndex,
    variables: Vec<MilpVariable>,
    constraints: Vec<LinearConstraint>,
}

impl Builder {
    fn var(&mut self, key: VarKey, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let name = key.name();
        let id = self.index.push(key);
        self.variables.push(MilpVariable {
            id,
            name,
            kind,
            lower,
            upper,
        });
        id
    }

    fn binary(&mut self, key: VarKey) -> VarId {
        self.var(key, VarKind::Binary, 0.0, 1.0)
    }

    fn row(&mut self, family: ConstraintFamily, terms: Vec<(f64, VarId)>, relation: Relation, rhs: f64) {
        self.constraints.push(LinearConstraint {
            terms,
            relation,
            rhs,
            family,
        });
    }
}

/// Build the mixed-integer model for placing `requests` on `graph`.
///
/// Inputs are expected to have passed [`crate::model::validate`].
pub fn build_model(
    graph: &SubstrateGraph,
    requests: &[SliceRequest],
    config: &BuildConfig,
) -> Result<(MilpModel, VariableIndex), BuildError> {
    let routing = &config.routing;
    let pairs = pairs_for(graph, requests, routing);
    let m = big_m_with(&pairs, requests, routing) * config.big_m_scale;
    let plans = plan_chains(graph, requests, routing, &pairs)?;

    let estimate = graph.nodes.len()
        + plans
            .iter()
            .map(|p| {
                p.slots.iter().filter(|s| s.nf.is_some()).map(|s| s.nodes.len()).sum::<usize>()
                    + p.hops.iter().map(|h| 1 + 3 * h.pairs.len()).sum::<usize>()
            })
            .sum::<usize>();
    if estimate > config.max_variables {
        return Err(BuildError::ModelTooLarge {
            variables: estimate,
            limit: config.max_variables,
        });
    }

    let mut b = Builder {
        index: VariableIndex::default(),
        variables: Vec::with_capacity(estimate),
        constraints: Vec::new(),
    };

    let node_ids = graph.sorted_node_ids();
    let rho: BTreeMap<NodeId, VarId> = node_ids
        .iter()
        .map(|v| (v.clone(), b.binary(VarKey::Rho(v.clone()))))
        .collect();

    // Per node: (demand vector, Y var) of every function that may land there.
    let mut load: BTreeMap<NodeId, Vec<(VarId, &crate::model::ResourceVector)>> = BTreeMap::new();
    // Per unordered non-self pair: bandwidth copies routed onto it.
    let mut pair_load: BTreeMap<(NodeId, NodeId), Vec<VarId>> = BTreeMap::new();

    for plan in &plans {
        let sfc = plan.sfc;
        // y[slot][node] -> var; None for pinned endpoints (constant 1).
        let mut y: Vec<BTreeMap<NodeId, VarId>> = Vec::with_capacity(plan.slots.len());
        for slot in &plan.slots {
            let mut vars = BTreeMap::new();
            if let Some(key) = &slot.nf {
                for v in &slot.nodes {
                    vars.insert(v.clone(), b.binary(VarKey::Y(key.clone(), v.clone())));
                }
            }
            y.push(vars);
        }

        for (slot, vars) in plan.slots.iter().zip(&y) {
            let Some(key) = &slot.nf else { continue };
            let nf = &sfc.nfs.iter().find(|f| f.id == key.nf).expect("slot refers to chain function");
            b.row(
                ConstraintFamily::Placement,
                vars.values().map(|id| (1.0, *id)).collect(),
                Relation::Eq,
                1.0,
            );
            for (v, id) in vars {
                b.row(ConstraintFamily::NodeActive, vec![(1.0, rho[v]), (-1.0, *id)], Relation::Ge, 0.0);
                load.entry(v.clone()).or_default().push((*id, &nf.demand));
            }
        }

        let mut phi_l = Vec::with_capacity(plan.hops.len());
        for hop in &plan.hops {
            let hop_phi = b.var(VarKey::PhiL(hop.key.clone()), VarKind::Continuous, 0.0, sfc.latency_budget);
            phi_l.push(hop_phi);
            let mut onehot = Vec::with_capacity(hop.pairs.len());
            for (u, v) in &hop.pairs {
                let z = b.binary(VarKey::Z(hop.key.clone(), u.clone(), v.clone()));
                let lat_copy = b.var(
                    VarKey::PhiLPair(hop.key.clone(), u.clone(), v.clone()),
                    VarKind::Continuous,
                    0.0,
                    f64::INFINITY,
                );
                let bw_copy = b.var(
                    VarKey::PhiBPair(hop.key.clone(), u.clone(), v.clone()),
                    VarKind::Continuous,
                    0.0,
                    f64::INFINITY,
                );
                onehot.push((1.0, z));

                // Z agrees with both endpoint placements.
                match y[hop.prev].get(u) {
                    Some(yu) => b.row(ConstraintFamily::LinkCoupling, vec![(1.0, z), (-1.0, *yu)], Relation::Le, 0.0),
                    None => b.row(ConstraintFamily::LinkCoupling, vec![(1.0, z)], Relation::Le, 1.0),
                }
                match y[hop.next].get(v) {
                    Some(yv) => b.row(ConstraintFamily::LinkCoupling, vec![(1.0, z), (-1.0, *yv)], Relation::Le, 0.0),
                    None => b.row(ConstraintFamily::LinkCoupling, vec![(1.0, z)], Relation::Le, 1.0),
                }
                let mut both = vec![(1.0, z)];
                let mut rhs = -1.0;
                for (slot, node) in [(hop.prev, u), (hop.next, v)] {
                    match y[slot].get(node) {
                        Some(id) => both.push((-1.0, *id)),
                        None => rhs += 1.0,
                    }
                }
                b.row(ConstraintFamily::LinkCoupling, both, Relation::Ge, rhs);

                // Latency copy equals the hop allotment when Z = 1 and sits
                // at [M, phiL + M] otherwise.
                b.row(
                    ConstraintFamily::LatencyLinearization,
                    vec![(1.0, lat_copy), (-1.0, hop_phi), (m, z)],
                    Relation::Le,
                    m,
                );
                b.row(
                    ConstraintFamily::LatencyLinearization,
                    vec![(1.0, hop_phi), (-1.0, lat_copy), (m, z)],
                    Relation::Le,
                    m,
                );
                b.row(ConstraintFamily::LatencyLinearization, vec![(1.0, lat_copy), (m, z)], Relation::Ge, m);
                let latency = pairs.get(u, v).expect("candidate pair is eligible").latency;
                b.row(
                    ConstraintFamily::LatencyLink,
                    vec![(1.0, lat_copy), (-m, z)],
                    Relation::Ge,
                    latency - m,
                );

                // Bandwidth copy equals the hop bandwidth when Z = 1, else 0.
                let w = sfc.hop_bandwidth;
                b.row(ConstraintFamily::BwLinearization, vec![(1.0, bw_copy), (m, z)], Relation::Le, w + m);
                b.row(ConstraintFamily::BwLinearization, vec![(1.0, bw_copy), (-m, z)], Relation::Ge, w - m);
                b.row(ConstraintFamily::BwLinearization, vec![(1.0, bw_copy), (-m, z)], Relation::Le, 0.0);

                if u != v {
                    let key = if u < v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
                    pair_load.entry(key).or_default().push(bw_copy);
                }
            }
            b.row(ConstraintFamily::LinkOneHot, onehot, Relation::Eq, 1.0);
        }
        if !phi_l.is_empty() {
            b.row(
                ConstraintFamily::LatencyBudget,
                phi_l.iter().map(|id| (1.0, *id)).collect(),
                Relation::Le,
                sfc.latency_budget,
            );
        }
    }

    for (v, entries) in &load {
        let node = graph.node(v).expect("authorized node exists");
        for (kind, cap) in node.capacity.iter() {
            let terms: Vec<(f64, VarId)> = entries
                .iter()
                .map(|(id, demand)| (demand.get(kind), *id))
                .filter(|(c, _)| *c != 0.0)
                .collect();
            if !terms.is_empty() {
                b.row(ConstraintFamily::Resource, terms, Relation::Le, cap);
            }
        }
    }

    for ((u, v), copies) in &pair_load {
        let capacity = pairs.get(u, v).expect("loaded pair is eligible").bandwidth;
        b.row(
            ConstraintFamily::BwCapacity,
            copies.iter().map(|id| (1.0, *id)).collect(),
            Relation::Le,
            capacity,
        );
    }

    let objective = rho.values().map(|id| (1.0, *id)).collect();
    let model = MilpModel {
        variables: b.variables,
        constraints: b.constraints,
        objective,
        big_m: m,
    };
    Ok((model, b.index))
}
