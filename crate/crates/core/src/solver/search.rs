//! Dense problem representation and the depth-first branch-and-bound.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::model::{
    authorized_nodes, chain_positions, eligible_pairs_with, ChainPosition, HopKey, NfKey, NodeId, PlacementSolution,
    RoutingConfig, SliceRequest, SolveStatus, SubstrateGraph,
};

use super::PruneRules;

/// Slack on latency and bandwidth sums.
pub(crate) const LINK_TOL: f64 = 1e-6;
const UNASSIGNED: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Anchor {
    Nf(usize),
    Fixed(usize),
}

#[derive(Debug)]
pub(crate) struct Hop {
    pub key: HopKey,
    pub from: Anchor,
    pub to: Anchor,
}

#[derive(Debug)]
pub(crate) struct NfInfo {
    pub key: NfKey,
    pub demand: Vec<f64>,
    /// Authorized host indices, ascending (lexicographic id order).
    pub candidates: Vec<usize>,
    pub chain: usize,
    /// Hops with this function at one end.
    pub hops: Vec<usize>,
}

#[derive(Debug)]
pub(crate) struct Chain {
    pub budget: f64,
    pub bandwidth: f64,
}

/// Instance flattened to dense indices. Functions are numbered in chain
/// order: slices, then chains, then position.
#[derive(Debug)]
pub(crate) struct Problem {
    pub nodes: Vec<NodeId>,
    pub kinds: Vec<String>,
    /// `cap[v * kinds + k]`.
    pub cap: Vec<f64>,
    pub nfs: Vec<NfInfo>,
    pub hops: Vec<Hop>,
    pub chains: Vec<Chain>,
    /// `latency[u * n + v]`, `None` when `(u, v)` is not an eligible pair.
    latency: Vec<Option<f64>>,
    /// Unordered pair slot of a non-self eligible pair.
    slot: Vec<Option<usize>>,
    pub slot_cap: Vec<f64>,
    /// `suffix_demand[i * kinds + k]`: demand of functions `i..`.
    suffix_demand: Vec<f64>,
    /// Smallest positive demand of kind `k` among functions `i..`.
    suffix_min: Vec<f64>,
    /// Host indices by decreasing capacity, per kind.
    by_capacity: Vec<Vec<usize>>,
}

impl Problem {
    /// Flatten an instance. Returns a diagnostic string when a function has
    /// no authorized host.
    pub fn new(graph: &SubstrateGraph, requests: &[SliceRequest], routing: &RoutingConfig) -> Result<Self, String> {
        let nodes = graph.sorted_node_ids();
        let n = nodes.len();
        let position: BTreeMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let kinds = graph.resource_kinds();
        let nk = kinds.len();
        let mut cap = vec![0.0; n * nk];
        for node in &graph.nodes {
            let v = position[&node.id];
            for (k, kind) in kinds.iter().enumerate() {
                cap[v * nk + k] = node.capacity.get(kind);
            }
        }

        let endpoints = crate::model::pinned_endpoints(requests, routing);
        let pairs = eligible_pairs_with(graph, routing.mode, &endpoints);
        let mut latency = vec![None; n * n];
        let mut slot = vec![None; n * n];
        let mut slot_cap = Vec::new();
        for ((u, v), metrics) in pairs.iter() {
            let (iu, iv) = (position[u], position[v]);
            latency[iu * n + iv] = Some(metrics.latency);
            if iu < iv {
                slot[iu * n + iv] = Some(slot_cap.len());
                slot[iv * n + iu] = Some(slot_cap.len());
                slot_cap.push(metrics.bandwidth);
            }
        }

        let mut nfs = Vec::new();
        let mut hops = Vec::new();
        let mut chains = Vec::new();
        for req in requests {
            for sfc in &req.sfcs {
                let chain = chains.len();
                chains.push(Chain {
                    budget: sfc.latency_budget,
                    bandwidth: sfc.hop_bandwidth,
                });
                let mut anchors = Vec::new();
                for pos in chain_positions(sfc, routing) {
                    anchors.push(match pos {
                        ChainPosition::Nf(i) => {
                            let nf = &sfc.nfs[i];
                            let key = NfKey::new(&req.slice_id, &sfc.id, &nf.id);
                            let allowed = authorized_nodes(nf, graph)
                                .map_err(|_| format!("EmptyAuthorizedSet: {key} has no authorized host"))?;
                            nfs.push(NfInfo {
                                key,
                                demand: kinds.iter().map(|k| nf.demand.get(k)).collect(),
                                candidates: allowed.iter().map(|id| position[id]).collect(),
                                chain,
                                hops: Vec::new(),
                            });
                            Anchor::Nf(nfs.len() - 1)
                        }
                        ChainPosition::Ingress(id) | ChainPosition::Egress(id) => Anchor::Fixed(position[id]),
                    });
                }
                for h in 1..anchors.len() {
                    let idx = hops.len();
                    for a in [anchors[h - 1], anchors[h]] {
                        if let Anchor::Nf(j) = a {
                            nfs[j].hops.push(idx);
                        }
                    }
                    hops.push(Hop {
                        key: HopKey::new(&req.slice_id, &sfc.id, h),
                        from: anchors[h - 1],
                        to: anchors[h],
                    });
                }
            }
        }

        let g = nfs.len();
        let mut suffix_demand = vec![0.0; (g + 1) * nk];
        let mut suffix_min = vec![f64::INFINITY; (g + 1) * nk];
        for i in (0..g).rev() {
            for k in 0..nk {
                let d = nfs[i].demand[k];
                suffix_demand[i * nk + k] = suffix_demand[(i + 1) * nk + k] + d;
                let tail = suffix_min[(i + 1) * nk + k];
                suffix_min[i * nk + k] = if d > 0.0 { tail.min(d) } else { tail };
            }
        }
        let by_capacity = (0..nk)
            .map(|k| {
                let mut hosts: Vec<usize> = (0..n).filter(|v| cap[v * nk + k] > 0.0).collect();
                hosts.sort_by(|a, b| cap[b * nk + k].total_cmp(&cap[a * nk + k]).then(a.cmp(b)));
                hosts
            })
            .collect();

        Ok(Problem {
            nodes,
            kinds,
            cap,
            nfs,
            hops,
            chains,
            latency,
            slot,
            slot_cap,
            suffix_demand,
            suffix_min,
            by_capacity,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nk(&self) -> usize {
        self.kinds.len()
    }

    pub fn latency(&self, u: usize, v: usize) -> Option<f64> {
        self.latency[u * self.n() + v]
    }

    pub fn fits_alone(&self, i: usize, v: usize) -> bool {
        let nk = self.nk();
        (0..nk).all(|k| self.nfs[i].demand[k] <= self.cap[v * nk + k])
    }

    /// Drop candidates that cannot hold the function even on an empty node.
    /// Returns the first function left without candidates.
    pub fn filter_by_capacity(&mut self) -> Option<usize> {
        for i in 0..self.nfs.len() {
            let keep: Vec<usize> = self.nfs[i]
                .candidates
                .iter()
                .copied()
                .filter(|&v| self.fits_alone(i, v))
                .collect();
            if keep.is_empty() {
                return Some(i);
            }
            self.nfs[i].candidates = keep;
        }
        None
    }

    /// Kind whose total demand exceeds total host capacity, if any.
    pub fn aggregate_shortfall(&self) -> Option<&str> {
        let nk = self.nk();
        (0..nk)
            .find(|&k| {
                let total: f64 = (0..self.n()).map(|v| self.cap[v * nk + k]).sum();
                self.suffix_demand[k] > total
            })
            .map(|k| self.kinds[k].as_str())
    }

    /// Build the solution for a complete assignment.
    pub fn solution(&self, assign: &[usize], status: SolveStatus) -> PlacementSolution {
        let mut sol = PlacementSolution::empty(status);
        for (i, nf) in self.nfs.iter().enumerate() {
            sol.assignment.insert(nf.key.clone(), self.nodes[assign[i]].clone());
        }
        for hop in &self.hops {
            let u = anchor_node(hop.from, assign);
            let v = anchor_node(hop.to, assign);
            sol.routing
                .insert(hop.key.clone(), (self.nodes[u].clone(), self.nodes[v].clone()));
            sol.hop_latency_budget
                .insert(hop.key.clone(), self.latency(u, v).expect("routed pair is eligible"));
        }
        sol.refresh_active();
        sol
    }
}

fn anchor_node(a: Anchor, assign: &[usize]) -> usize {
    match a {
        Anchor::Nf(j) => assign[j],
        Anchor::Fixed(v) => v,
    }
}

#[derive(Clone, Copy)]
enum Field {
    Used,
    Bandwidth,
    Latency,
}

/// Incremental search state with an undo log.
#[derive(Clone)]
pub(crate) struct State {
    pub assign: Vec<usize>,
    used: Vec<f64>,
    bw_used: Vec<f64>,
    lat_used: Vec<f64>,
    load: Vec<u32>,
    pub active: usize,
    undo: Vec<(Field, usize, f64)>,
    marks: Vec<usize>,
}

impl State {
    pub fn new(p: &Problem) -> Self {
        State {
            assign: vec![UNASSIGNED; p.nfs.len()],
            used: vec![0.0; p.cap.len()],
            bw_used: vec![0.0; p.slot_cap.len()],
            lat_used: vec![0.0; p.chains.len()],
            load: vec![0; p.n()],
            active: 0,
            undo: Vec::new(),
            marks: Vec::new(),
        }
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.load[v] > 0
    }

    pub fn free(&self, p: &Problem, v: usize, k: usize) -> f64 {
        let at = v * p.nk() + k;
        p.cap[at] - self.used[at]
    }

    pub fn placed_node(&self, i: usize) -> Option<usize> {
        let v = self.assign[i];
        (v != UNASSIGNED).then_some(v)
    }

    /// Assign function `i` to node `v` if routing to every placed neighbour
    /// is possible and the enabled rules hold. Leaves the state untouched on
    /// failure.
    pub fn place(&mut self, p: &Problem, i: usize, v: usize, rules: &PruneRules) -> bool {
        let nf = &p.nfs[i];
        let nk = p.nk();
        if rules.capacity {
            for k in 0..nk {
                if self.used[v * nk + k] + nf.demand[k] > p.cap[v * nk + k] {
                    return false;
                }
            }
        }

        let chain = &p.chains[nf.chain];
        let mut lat_add = 0.0;
        let mut bw_add: [(usize, f64); 2] = [(usize::MAX, 0.0); 2];
        for &h in &nf.hops {
            let hop = &p.hops[h];
            let (u, w) = match (hop.from, hop.to) {
                (Anchor::Nf(j), _) if j != i => match self.placed_node(j) {
                    Some(u) => (u, v),
                    None => continue,
                },
                (_, Anchor::Nf(j)) if j != i => match self.placed_node(j) {
                    Some(w) => (v, w),
                    None => continue,
                },
                (Anchor::Fixed(u), _) => (u, v),
                (_, Anchor::Fixed(w)) => (v, w),
                _ => unreachable!("a hop joins two distinct positions"),
            };
            let Some(lat) = p.latency(u, w) else {
                return false;
            };
            lat_add += lat;
            if let Some(s) = p.slot[u * p.n() + w] {
                let entry = bw_add
                    .iter_mut()
                    .find(|(slot, _)| *slot == s || *slot == usize::MAX)
                    .expect("at most two hops per function");
                entry.0 = s;
                entry.1 += chain.bandwidth;
            }
        }
        if rules.latency && self.lat_used[nf.chain] + lat_add > chain.budget + LINK_TOL {
            return false;
        }
        if rules.bandwidth {
            for &(s, add) in bw_add.iter().filter(|(s, _)| *s != usize::MAX) {
                if self.bw_used[s] + add > p.slot_cap[s] + LINK_TOL {
                    return false;
                }
            }
        }

        self.marks.push(self.undo.len());
        for k in 0..nk {
            let at = v * nk + k;
            self.undo.push((Field::Used, at, self.used[at]));
            self.used[at] += nf.demand[k];
        }
        if lat_add != 0.0 {
            self.undo.push((Field::Latency, nf.chain, self.lat_used[nf.chain]));
            self.lat_used[nf.chain] += lat_add;
        }
        for &(s, add) in bw_add.iter().filter(|(s, _)| *s != usize::MAX) {
            self.undo.push((Field::Bandwidth, s, self.bw_used[s]));
            self.bw_used[s] += add;
        }
        self.assign[i] = v;
        if self.load[v] == 0 {
            self.active += 1;
        }
        self.load[v] += 1;
        true
    }

    pub fn unplace(&mut self, i: usize) {
        let v = self.assign[i];
        let mark = self.marks.pop().expect("unplace matches a place");
        for (field, at, old) in self.undo.drain(mark..).rev() {
            match field {
                Field::Used => self.used[at] = old,
                Field::Bandwidth => self.bw_used[at] = old,
                Field::Latency => self.lat_used[at] = old,
            }
        }
        self.assign[i] = UNASSIGNED;
        self.load[v] -= 1;
        if self.load[v] == 0 {
            self.active -= 1;
        }
    }

    /// Full check of the rules that `rules` switched off during the descent.
    fn leaf_ok(&self, p: &Problem, rules: &PruneRules) -> bool {
        (rules.capacity || self.used.iter().zip(&p.cap).all(|(u, c)| u <= c))
            && (rules.latency
                || self
                    .lat_used
                    .iter()
                    .zip(&p.chains)
                    .all(|(l, c)| *l <= c.budget + LINK_TOL))
            && (rules.bandwidth
                || self
                    .bw_used
                    .iter()
                    .zip(&p.slot_cap)
                    .all(|(b, c)| *b <= c + LINK_TOL))
    }

    /// Active nodes plus the fewest extra hosts that could absorb the demand
    /// of functions `depth..`. `None` when even all hosts cannot.
    pub fn lower_bound(&self, p: &Problem, depth: usize) -> Option<usize> {
        let nk = p.nk();
        let mut extra = 0;
        for k in 0..nk {
            let remaining = p.suffix_demand[depth * nk + k];
            if remaining <= 0.0 {
                continue;
            }
            let smallest = p.suffix_min[depth * nk + k];
            let usable: f64 = (0..p.n())
                .filter(|&v| self.is_active(v))
                .map(|v| self.free(p, v, k))
                .filter(|&f| f >= smallest)
                .sum();
            let need = remaining - usable;
            if need <= 1e-9 {
                continue;
            }
            let mut acc = 0.0;
            let mut count = 0;
            for &v in &p.by_capacity[k] {
                if self.is_active(v) {
                    continue;
                }
                acc += p.cap[v * nk + k];
                count += 1;
                if acc >= need - 1e-9 {
                    break;
                }
            }
            if acc < need - 1e-9 {
                return None;
            }
            extra = extra.max(count);
        }
        Some(self.active + extra)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    /// The tree was exhausted or the incumbent matches the root bound.
    Proven,
    /// Time or node budget ran out, or the cutoff was reached.
    Limit,
}

pub(crate) struct Search<'a> {
    p: &'a Problem,
    rules: PruneRules,
    state: State,
    pub best: Option<(usize, Vec<usize>)>,
    best_from_dfs: bool,
    pub root_lb: usize,
    pub nodes: u64,
    tie_break_nodes: u64,
    /// Once set, equal-objective subtrees are pruned too.
    strict: bool,
    deadline: Option<Instant>,
    node_budget: Option<u64>,
    cutoff: Option<usize>,
    stop: Option<Stop>,
}

pub(crate) struct SearchLimits {
    pub deadline: Option<Instant>,
    pub node_budget: Option<u64>,
    pub cutoff: Option<usize>,
    pub tie_break_nodes: u64,
}

impl<'a> Search<'a> {
    pub fn new(
        p: &'a Problem,
        rules: PruneRules,
        root_lb: usize,
        incumbent: Option<(usize, Vec<usize>)>,
        limits: SearchLimits,
    ) -> Self {
        Search {
            p,
            rules,
            state: State::new(p),
            best: incumbent,
            best_from_dfs: false,
            root_lb,
            nodes: 0,
            tie_break_nodes: limits.tie_break_nodes,
            strict: false,
            deadline: limits.deadline,
            node_budget: limits.node_budget,
            cutoff: limits.cutoff,
            stop: None,
        }
    }

    fn best_obj(&self) -> Option<usize> {
        self.best.as_ref().map(|(o, _)| *o)
    }

    fn proven(&self) -> bool {
        self.best_obj() == Some(self.root_lb)
    }

    /// Run to completion or until a limit. Returns why it stopped.
    pub fn run(&mut self) -> Stop {
        if self.proven() && self.tie_break_nodes == 0 {
            return Stop::Proven;
        }
        self.dfs(0);
        self.stop.unwrap_or(Stop::Proven)
    }

    fn dfs(&mut self, depth: usize) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.stop = Some(Stop::Limit);
                    return;
                }
            }
        }
        if self.node_budget.is_some_and(|b| self.nodes > b) {
            self.stop = Some(Stop::Limit);
            return;
        }
        if !self.strict && self.nodes > self.tie_break_nodes {
            if self.proven() {
                // Objective already optimal; keep the incumbent.
                self.stop = Some(Stop::Proven);
                return;
            }
            self.strict = true;
        }

        if depth == self.p.nfs.len() {
            self.leaf();
            return;
        }

        if self.rules.bound {
            let Some(lb) = self.state.lower_bound(self.p, depth) else {
                return;
            };
            if let Some(best) = self.best_obj() {
                if lb > best || (lb == best && (self.best_from_dfs || self.strict)) {
                    return;
                }
            }
        }

        let p = self.p;
        for &v in &p.nfs[depth].candidates {
            if self.state.place(p, depth, v, &self.rules) {
                self.dfs(depth + 1);
                self.state.unplace(depth);
                if self.stop.is_some() {
                    return;
                }
            }
        }
    }

    fn leaf(&mut self) {
        if !self.state.leaf_ok(self.p, &self.rules) {
            return;
        }
        let obj = self.state.active;
        let better = match self.best_obj() {
            None => true,
            Some(best) => obj < best || (obj == best && !self.best_from_dfs && !self.strict),
        };
        if !better {
            return;
        }
        self.best = Some((obj, self.state.assign.clone()));
        self.best_from_dfs = true;
        if self.rules.bound && obj == self.root_lb {
            self.stop = Some(Stop::Proven);
        } else if self.cutoff.is_some_and(|c| obj <= c) {
            self.stop = Some(Stop::Limit);
        }
    }
}
