use std::collections::BTreeSet;

use crate::model::{
    authorized_nodes, chain_positions, eligible_pairs_with, ChainPosition, HopKey, NfKey, NodeId, PlacementSolution,
    RoutingConfig, SliceRequest, SolveStatus, SubstrateGraph,
};
use crate::verify::verify;

pub const BRUTE_FORCE_MAX_NFS: usize = 6;
pub const BRUTE_FORCE_MAX_HOSTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BruteForceError {
    #[error("instance too large for exhaustive enumeration: {nfs} functions, {hosts} hosts")]
    InstanceTooLarge { nfs: usize, hosts: usize },
}

/// Exhaustive minimum over every assignment vector, each checked with
/// [`crate::verify::verify`]. Ties go to the first vector in lexicographic
/// order. Limited to [`BRUTE_FORCE_MAX_NFS`] functions and
/// [`BRUTE_FORCE_MAX_HOSTS`] hosts.
pub fn brute_force_optimum(
    graph: &SubstrateGraph,
    requests: &[SliceRequest],
    config: &RoutingConfig,
) -> Result<PlacementSolution, BruteForceError> {
    let mut keys = Vec::new();
    let mut domains: Vec<Vec<NodeId>> = Vec::new();
    let mut empty = None;
    for req in requests {
        for sfc in &req.sfcs {
            for nf in &sfc.nfs {
                let key = NfKey::new(&req.slice_id, &sfc.id, &nf.id);
                match authorized_nodes(nf, graph) {
                    Ok(set) => domains.push(set.into_iter().collect()),
                    Err(_) => {
                        empty.get_or_insert_with(|| key.clone());
                        domains.push(Vec::new());
                    }
                }
                keys.push(key);
            }
        }
    }
    let hosts = graph.hosts().count();
    if keys.len() > BRUTE_FORCE_MAX_NFS || hosts > BRUTE_FORCE_MAX_HOSTS {
        return Err(BruteForceError::InstanceTooLarge { nfs: keys.len(), hosts });
    }
    if let Some(key) = empty {
        return Ok(PlacementSolution::infeasible(format!("EmptyAuthorizedSet: {key} has no authorized host")));
    }

    let endpoints: BTreeSet<NodeId> = requests
        .iter()
        .flat_map(|r| &r.sfcs)
        .flat_map(|c| [c.ingress.clone(), c.egress.clone()])
        .flatten()
        .filter(|_| config.pin_endpoints)
        .collect();
    let pairs = eligible_pairs_with(graph, config.mode, &endpoints);

    let mut best: Option<PlacementSolution> = None;
    let mut digits = vec![0usize; keys.len()];
    loop {
        let mut sol = PlacementSolution::empty(SolveStatus::Optimal);
        for (i, key) in keys.iter().enumerate() {
            sol.assignment.insert(key.clone(), domains[i][digits[i]].clone());
        }
        // Routing and allotments follow from the assignment.
        for req in requests {
            for sfc in &req.sfcs {
                let nodes: Vec<NodeId> = chain_positions(sfc, config)
                    .into_iter()
                    .map(|pos| match pos {
                        ChainPosition::Nf(i) => sol.assignment[&NfKey::new(&req.slice_id, &sfc.id, &sfc.nfs[i].id)].clone(),
                        ChainPosition::Ingress(id) | ChainPosition::Egress(id) => id.clone(),
                    })
                    .collect();
                for (h, w) in nodes.windows(2).enumerate() {
                    let key = HopKey::new(&req.slice_id, &sfc.id, h + 1);
                    let latency = pairs.get(&w[0], &w[1]).map_or(0.0, |m| m.latency);
                    sol.routing.insert(key.clone(), (w[0].clone(), w[1].clone()));
                    sol.hop_latency_budget.insert(key, latency);
                }
            }
        }
        sol.refresh_active();
        let improves = best.as_ref().is_none_or(|b| sol.objective < b.objective);
        if improves && verify(graph, requests, &sol, config).overall {
            best = Some(sol);
        }

        // Advance the odometer; the last function varies fastest.
        let mut i = keys.len();
        loop {
            if i == 0 {
                return Ok(best.unwrap_or_else(|| PlacementSolution::infeasible("no feasible assignment")));
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < domains[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
}
