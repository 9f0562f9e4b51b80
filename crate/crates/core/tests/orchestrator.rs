mod common;

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::AtomicBool;

use proptest::prelude::*;

use common::sequence;
use netslice_core::io::TimedRequest;
use netslice_core::model::{NfKey, NodeId, SliceRequest, SubstrateGraph};
use netslice_core::orchestrator::{
    run_loop, EventKind, OrchestratorConfig, OrchestratorMode, OrchestratorState, SubmitError,
};
use netslice_core::scenario::{gen_requests, gen_substrate, GenParams, Interval};

fn config(mode: OrchestratorMode) -> OrchestratorConfig {
    OrchestratorConfig {
        mode,
        ..Default::default()
    }
}

/// Recompute node loads and pair loads from scratch and compare with the
/// base capacities.
fn assert_conserved(state: &OrchestratorState) {
    let base = state.base();
    let sol = state.solution();
    let mut load: BTreeMap<(NodeId, String), f64> = BTreeMap::new();
    let mut pair: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for req in state.requests() {
        for sfc in &req.sfcs {
            let mut hosts = Vec::new();
            for nf in &sfc.nfs {
                let node = sol.assignment[&NfKey::new(&req.slice_id, &sfc.id, &nf.id)].clone();
                for (kind, d) in nf.demand.iter() {
                    *load.entry((node.clone(), kind.to_string())).or_default() += d;
                }
                hosts.push(node);
            }
            for w in hosts.windows(2) {
                if w[0] != w[1] {
                    let key = if w[0] < w[1] { (w[0].clone(), w[1].clone()) } else { (w[1].clone(), w[0].clone()) };
                    *pair.entry(key).or_default() += sfc.hop_bandwidth;
                }
            }
        }
    }
    for ((node, kind), used) in load {
        let cap = base.node(&node).unwrap().capacity.get(&kind);
        assert!(used <= cap + 1e-9, "{node} {kind}: {used} > {cap}");
    }
    for ((u, v), used) in pair {
        let cap = base.link(&u, &v).expect("direct routing uses physical links").bandwidth;
        assert!(used <= cap + 1e-6, "({u}, {v}): {used} > {cap}");
    }
}

fn small_world(seed: u64, slices: usize) -> (SubstrateGraph, Vec<SliceRequest>) {
    let params = GenParams {
        n_hosts: 5,
        seed,
        host_capacity: [("cpu".to_string(), Interval(100, 250))].into_iter().collect(),
        link_bandwidth: Interval(100, 300),
        ..Default::default()
    };
    let graph = gen_substrate(&params).unwrap();
    let requests = gen_requests(slices, 1, 3, &params);
    (graph, requests)
}

#[test]
fn six_dc_incremental_walkthrough() {
    let seq = sequence("six_dc_sequence.json");
    let mut state = OrchestratorState::new(seq.graph(), config(OrchestratorMode::Incremental));
    let mut requests = seq.requests.into_iter();

    let s1 = requests.next().unwrap();
    let e1 = state.submit(s1.request, s1.at).unwrap();
    assert_eq!(e1.kind, EventKind::Placed);
    assert_eq!(state.solution().objective, 3);

    // S1's chain uses 10 Mbps on each of its two hops.
    let residual = state.residual();
    let mut consumed = 0.0;
    for link in &seq.links {
        let left = residual.link(&link.endpoints[0], &link.endpoints[1]).unwrap().bandwidth;
        assert!(left == link.bandwidth || left == link.bandwidth - 10.0);
        consumed += link.bandwidth - left;
    }
    assert_eq!(consumed, 20.0);

    let s2 = requests.next().unwrap();
    let e2 = state.submit(s2.request, s2.at).unwrap();
    assert_eq!(e2.kind, EventKind::Placed);
    let r = &state.solution().assignment[&NfKey::new("S2", "f1", "r")];
    assert!(["B", "C", "F"].contains(&r.as_str()));
    let g = &state.solution().assignment[&NfKey::new("S2", "f1", "g")];

    // S2 adds exactly 100 Mbps on the (g, r) link unless they share a node.
    let residual = state.residual();
    let mut consumed = 0.0;
    for link in &seq.links {
        consumed += link.bandwidth - residual.link(&link.endpoints[0], &link.endpoints[1]).unwrap().bandwidth;
    }
    assert_eq!(consumed, if g == r { 20.0 } else { 120.0 });
    assert_conserved(&state);
}

#[test]
fn stale_revision_is_rejected_without_side_effects() {
    let (graph, requests) = small_world(3, 2);
    let mut state = OrchestratorState::new(graph, config(OrchestratorMode::FullReopt));
    state.submit(requests[0].clone(), None).unwrap();
    let before = (state.solution().clone(), state.events().len());
    let err = state.submit(requests[0].clone(), None).unwrap_err();
    assert!(matches!(err, SubmitError::StaleRevision { stored: 1, submitted: 1, .. }));
    assert_eq!((state.solution().clone(), state.events().len()), before);
}

#[test]
fn update_replaces_the_previous_revision() {
    let (graph, requests) = small_world(5, 1);
    let mut state = OrchestratorState::new(graph.clone(), config(OrchestratorMode::Incremental));
    state.submit(requests[0].clone(), None).unwrap();
    let mut update = requests[0].clone();
    update.revision = 2;
    for nf in &mut update.sfcs[0].nfs {
        nf.demand = nf.demand.scaled(0.5);
    }
    let event = state.submit(update.clone(), None).unwrap();
    assert_eq!(event.kind, EventKind::Replanned);
    assert_eq!(state.requests(), &[update.clone()]);

    // Residual CPU is the base minus revision 2's demand only.
    let residual = state.residual();
    let used: f64 = graph.nodes.iter().map(|n| n.capacity.get("cpu")).sum::<f64>()
        - residual.nodes.iter().map(|n| n.capacity.get("cpu")).sum::<f64>();
    let expected: f64 = update.sfcs[0].nfs.iter().map(|nf| nf.demand.get("cpu")).sum();
    assert!((used - expected).abs() < 1e-9);
}

#[test]
fn run_loop_logs_every_request_in_order() {
    let (graph, requests) = small_world(11, 3);
    let mut source: VecDeque<TimedRequest> = requests
        .iter()
        .enumerate()
        .map(|(i, r)| TimedRequest {
            at: Some(i as f64),
            request: r.clone(),
        })
        .collect();
    let mut bad = requests[0].clone();
    bad.sfcs.clear();
    source.push_back(TimedRequest { at: None, request: bad });
    let state = run_loop(
        OrchestratorState::new(graph, config(OrchestratorMode::FullReopt)),
        &mut source,
        &AtomicBool::new(false),
    );
    let decisions: Vec<(EventKind, &str)> = state
        .events()
        .iter()
        .filter(|e| e.kind != EventKind::RequestAccepted)
        .map(|e| (e.kind, e.slice_id.as_str()))
        .collect();
    assert_eq!(decisions.len(), 4);
    for (i, (kind, slice)) in decisions.iter().take(3).enumerate() {
        assert!(matches!(kind, EventKind::Placed | EventKind::RejectedInfeasible));
        assert_eq!(*slice, requests[i].slice_id);
    }
    assert_eq!(decisions[3].0, EventKind::RejectedInvalid);
    let seqs: Vec<u64> = state.events().iter().map(|e| e.seq).collect();
    assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1));
}

#[test]
fn stop_flag_leaves_state_untouched() {
    let (graph, requests) = small_world(2, 1);
    let mut source: VecDeque<TimedRequest> = requests.into_iter().map(|request| TimedRequest { at: None, request }).collect();
    let state = run_loop(
        OrchestratorState::new(graph, OrchestratorConfig::default()),
        &mut source,
        &AtomicBool::new(true),
    );
    assert!(state.events().is_empty());
    assert!(state.requests().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn both_modes_conserve_capacity_and_full_never_loses(seed in 0u64..10_000, slices in 2usize..6) {
        let (graph, requests) = small_world(seed, slices);
        let mut full = OrchestratorState::new(graph.clone(), config(OrchestratorMode::FullReopt));
        let mut inc = OrchestratorState::new(graph, config(OrchestratorMode::Incremental));
        for r in &requests {
            full.submit(r.clone(), None).unwrap();
            assert_conserved(&full);
            inc.submit(r.clone(), None).unwrap();
            assert_conserved(&inc);
        }
        // Re-submit the first slice with a bumped revision.
        let mut update = requests[0].clone();
        update.revision = 2;
        full.submit(update.clone(), None).unwrap();
        assert_conserved(&full);
        inc.submit(update, None).unwrap();
        assert_conserved(&inc);

        let ids = |s: &OrchestratorState| s.requests().iter().map(|r| (r.slice_id.clone(), r.revision)).collect::<std::collections::BTreeSet<_>>();
        if ids(&full) == ids(&inc) {
            prop_assert!(full.solution().objective <= inc.solution().objective);
        }
    }
}
