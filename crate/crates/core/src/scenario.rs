//! Seeded workload generation and the sweep presets.
//!
//! Substrates are random graphs over hosts and connectors (each node pair is
//! linked independently with probability `connectivity`; a draw that comes out
//! disconnected is retried with a derived seed). Demands, capacities and link
//! weights are drawn from discrete uniform intervals. All output is a pure
//! function of the parameters, seed included.
//!
//! ```
//! use netslice_core::scenario::{gen_requests, gen_substrate, GenParams};
//!
//! let params = GenParams { seed: 7, ..GenParams::default() };
//! let graph = gen_substrate(&params).unwrap();
//! assert_eq!(graph.nodes.len(), 12);
//! let requests = gen_requests(5, 2, 4, &params);
//! assert_eq!(netslice_core::model::gamma(&requests), 40);
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    NfSpec, NodeCharacteristics, ResourceVector, SfcSpec, SliceRequest, SubstrateGraph, SubstrateLink, SubstrateNode,
};

/// Retries before a disconnected draw is reported as a failure.
pub const MAX_CONNECTIVITY_RETRIES: u32 = 200;

/// Closed integer interval `[min, max]`, written `[min, max]` in documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval(pub u32, pub u32);

impl Interval {
    pub fn min(self) -> u32 {
        self.0
    }

    pub fn max(self) -> u32 {
        self.1
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        rng.gen_range(self.0..=self.1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub n_hosts: usize,
    pub n_connectors: usize,
    /// Probability that a given node pair is linked.
    pub connectivity: f64,
    /// Host capacity interval per resource kind. The keys are the resource
    /// kinds of the generated instance.
    pub host_capacity: BTreeMap<String, Interval>,
    pub link_bandwidth: Interval,
    pub link_latency: Interval,
    /// Per-kind demand of each function.
    pub demand: Interval,
    pub hop_bandwidth: Interval,
    pub latency_budget: Interval,
    pub security_levels: Interval,
    pub iaas_ids: Interval,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_hosts: 12,
            n_connectors: 0,
            connectivity: 0.5,
            host_capacity: BTreeMap::from([
                ("cpu".to_string(), Interval(1400, 2200)),
                ("ram".to_string(), Interval(2800, 4400)),
            ]),
            link_bandwidth: Interval(500, 1000),
            link_latency: Interval(1, 20),
            demand: Interval(50, 100),
            hop_bandwidth: Interval(50, 100),
            latency_budget: Interval(50, 100),
            security_levels: Interval(1, 3),
            iaas_ids: Interval(1, 3),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no connected substrate after {0} attempts")]
    GenerationFailed(u32),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl GenParams {
    pub fn check(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidParams(m.to_string()));
        if self.n_hosts == 0 {
            return bad("n_hosts must be positive");
        }
        if !(0.0..=1.0).contains(&self.connectivity) {
            return bad("connectivity must lie in [0, 1]");
        }
        if self.host_capacity.is_empty() {
            return bad("at least one resource kind is required");
        }
        let mut intervals: Vec<(&str, Interval)> = self.host_capacity.iter().map(|(k, i)| (k.as_str(), *i)).collect();
        intervals.extend([
            ("link_bandwidth", self.link_bandwidth),
            ("link_latency", self.link_latency),
            ("demand", self.demand),
            ("hop_bandwidth", self.hop_bandwidth),
            ("latency_budget", self.latency_budget),
            ("security_levels", self.security_levels),
            ("iaas_ids", self.iaas_ids),
        ]);
        for (name, i) in intervals {
            if i.min() > i.max() {
                return bad(&format!("{name}: lower bound above upper bound"));
            }
        }
        for (name, i) in [
            ("link_bandwidth", self.link_bandwidth),
            ("hop_bandwidth", self.hop_bandwidth),
            ("latency_budget", self.latency_budget),
        ] {
            if i.min() == 0 {
                return bad(&format!("{name} must be positive"));
            }
        }
        if self.security_levels.max() > u8::MAX as u32 {
            return bad("security levels must fit in a byte");
        }
        Ok(())
    }

    fn kinds(&self) -> Vec<&str> {
        self.host_capacity.keys().map(String::as_str).collect()
    }
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold several values into one seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED, |acc, p| mix(acc ^ mix(*p)))
}

fn width(n: usize) -> usize {
    n.max(1).to_string().len().max(2)
}

/// Random connected substrate.
pub fn gen_substrate(params: &GenParams) -> Result<SubstrateGraph, GenError> {
    params.check()?;
    for attempt in 0..MAX_CONNECTIVITY_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[params.seed, 1, attempt as u64]));
        let graph = draw_substrate(params, &mut rng);
        if is_connected(&graph) {
            return Ok(graph);
        }
    }
    Err(GenError::GenerationFailed(MAX_CONNECTIVITY_RETRIES))
}

fn draw_substrate(params: &GenParams, rng: &mut ChaCha8Rng) -> SubstrateGraph {
    let w = width(params.n_hosts.max(params.n_connectors));
    let kinds = params.kinds();
    let mut nodes = Vec::with_capacity(params.n_hosts + params.n_connectors);
    for i in 1..=params.n_hosts {
        let capacity = ResourceVector::from_pairs(params.host_capacity.iter().map(|(k, iv)| (k.clone(), iv.draw(rng))));
        let characteristics = NodeCharacteristics {
            security_level: params.security_levels.draw(rng) as u8,
            iaas_id: params.iaas_ids.draw(rng) as u32,
        };
        nodes.push(SubstrateNode::host(format!("h{i:0w$}"), capacity, characteristics));
    }
    for i in 1..=params.n_connectors {
        nodes.push(SubstrateNode::connector(format!("r{i:0w$}"), &kinds));
    }
    let mut links = Vec::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if rng.gen_bool(params.connectivity) {
                links.push(SubstrateLink::new(
                    nodes[a].id.as_str(),
                    nodes[b].id.as_str(),
                    params.link_bandwidth.draw(rng),
                    params.link_latency.draw(rng),
                ));
            }
        }
    }
    SubstrateGraph { nodes, links }
}

fn is_connected(graph: &SubstrateGraph) -> bool {
    let n = graph.nodes.len();
    if n == 0 {
        return true;
    }
    let index: BTreeMap<&str, usize> = graph.nodes.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    let mut adj = vec![Vec::new(); n];
    for l in &graph.links {
        let (a, b) = (index[l.endpoints[0].as_str()], index[l.endpoints[1].as_str()]);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `n_slices` slices of `n_sfcs` chains with `n_nfs` unrestricted functions.
pub fn gen_requests(n_slices: usize, n_sfcs: usize, n_nfs: usize, params: &GenParams) -> Vec<SliceRequest> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[params.seed, 2]));
    let (ws, wf, wn) = (width(n_slices), width(n_sfcs), width(n_nfs));
    (1..=n_slices)
        .map(|s| SliceRequest {
            slice_id: format!("s{s:0ws$}"),
            revision: 1,
            sfcs: (1..=n_sfcs)
                .map(|f| {
                    let nfs = (1..=n_nfs)
                        .map(|j| {
                            let demand = ResourceVector::from_pairs(
                                params.host_capacity.keys().map(|k| (k.clone(), params.demand.draw(&mut rng))),
                            );
                            NfSpec::new(format!("j{j:0wn$}"), demand)
                        })
                        .collect();
                    SfcSpec {
                        id: format!("f{f:0wf$}"),
                        nfs,
                        latency_budget: params.latency_budget.draw(&mut rng),
                        hop_bandwidth: params.hop_bandwidth.draw(&mut rng),
                        ingress: None,
                        egress: None,
                    }
                })
                .collect(),
        })
        .collect()
}

/// Workload shape of one configuration point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigPoint {
    /// Series label written to the `preset` column.
    pub label: String,
    pub slices: usize,
    pub sfcs: usize,
    pub nfs: usize,
    pub nodes: usize,
}

/// Which workload dimension a plan sweeps; the regression's x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Slices,
    Sfcs,
    Nfs,
}

impl Sweep {
    pub fn value(self, point: &ConfigPoint) -> usize {
        match self {
            Sweep::Slices => point.slices,
            Sweep::Sfcs => point.sfcs,
            Sweep::Nfs => point.nfs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Preset {
    VarySlices,
    VarySfcs,
    VaryNfs,
    ScaleCompare,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::VarySlices, Preset::VarySfcs, Preset::VaryNfs, Preset::ScaleCompare];

    pub fn name(self) -> &'static str {
        match self {
            Preset::VarySlices => "VARY_SLICES",
            Preset::VarySfcs => "VARY_SFCS",
            Preset::VaryNfs => "VARY_NFS",
            Preset::ScaleCompare => "SCALE_COMPARE",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GenError::UnknownPreset(s.to_string()))
    }
}

/// Configuration points, repetitions and base generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub sweep: Sweep,
    pub points: Vec<ConfigPoint>,
    pub repetitions: usize,
    #[serde(default)]
    pub params: GenParams,
}

pub const PRESET_REPETITIONS: usize = 100;
pub const BASE_NODES: usize = 12;

/// Node count of the growing series at `slices`.
pub fn growing_nodes(slices: usize) -> usize {
    BASE_NODES + 2 * slices.saturating_sub(1)
}

/// The plan of a named preset.
pub fn preset(name: &str) -> Result<ExperimentPlan, GenError> {
    Ok(preset_plan(name.parse()?))
}

pub fn preset_plan(preset: Preset) -> ExperimentPlan {
    let point = |label: &str, slices, sfcs, nfs, nodes| ConfigPoint {
        label: label.to_string(),
        slices,
        sfcs,
        nfs,
        nodes,
    };
    let name = preset.name();
    let (sweep, points) = match preset {
        Preset::VarySlices => (Sweep::Slices, (1..=50).map(|s| point(name, s, 2, 4, BASE_NODES)).collect()),
        Preset::VarySfcs => (Sweep::Sfcs, (2..=20).map(|c| point(name, 1, c, 4, BASE_NODES)).collect()),
        Preset::VaryNfs => (Sweep::Nfs, (2..=20).map(|n| point(name, 5, 2, n, BASE_NODES)).collect()),
        Preset::ScaleCompare => {
            let fixed = (1..=50).map(|s| point("SCALE_COMPARE_FIXED", s, 2, 4, BASE_NODES));
            let growing = (1..=50).map(|s| point("SCALE_COMPARE_GROWING", s, 2, 4, growing_nodes(s)));
            (Sweep::Slices, fixed.chain(growing).collect())
        }
    };
    ExperimentPlan {
        name: name.to_string(),
        sweep,
        points,
        repetitions: PRESET_REPETITIONS,
        params: GenParams::default(),
    }
}

impl ExperimentPlan {
    /// Keep only points whose swept value is at most `max`.
    pub fn truncate_sweep(&mut self, max: usize) {
        let sweep = self.sweep;
        self.points.retain(|p| sweep.value(p) <= max);
    }

    /// Seed of repetition `rep` at `point`, derived from the master seed.
    pub fn instance_seed(&self, master: u64, point: &ConfigPoint, rep: usize) -> u64 {
        derive_seed(&[
            master,
            point.slices as u64,
            point.sfcs as u64,
            point.nfs as u64,
            point.nodes as u64,
            rep as u64,
        ])
    }

    /// Substrate and requests of one repetition.
    pub fn instance(&self, point: &ConfigPoint, seed: u64) -> Result<(SubstrateGraph, Vec<SliceRequest>), GenError> {
        let params = GenParams {
            n_hosts: point.nodes,
            seed,
            ..self.params.clone()
        };
        let graph = gen_substrate(&params)?;
        let requests = gen_requests(point.slices, point.sfcs, point.nfs, &params);
        Ok((graph, requests))
    }
}

/// Input of the `gen` command: generator parameters plus workload shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub format: u32,
    #[serde(default)]
    pub params: GenParams,
    pub slices: usize,
    pub sfcs: usize,
    pub nfs: usize,
}
