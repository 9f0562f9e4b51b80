use serde::{Deserialize, Serialize};

use super::{NodeId, PairMode, SfcSpec};

/// How virtual links are mapped onto the substrate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingConfig {
    pub mode: PairMode,
    /// Treat a chain's ingress/egress nodes as fixed zero-demand endpoints
    /// whose hops count toward the latency budget and consume bandwidth.
    #[serde(default)]
    pub pin_endpoints: bool,
}

impl RoutingConfig {
    pub fn new(mode: PairMode) -> Self {
        RoutingConfig { mode, pin_endpoints: false }
    }
}

/// One position in a chain as seen by the routing layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainPosition<'a> {
    Ingress(&'a NodeId),
    /// Index into `SfcSpec::nfs`.
    Nf(usize),
    Egress(&'a NodeId),
}

/// Positions of a chain in traversal order. Hop `h` (for `h >= 1`) joins
/// positions `h - 1` and `h`.
pub fn chain_positions<'a>(sfc: &'a SfcSpec, config: &RoutingConfig) -> Vec<ChainPosition<'a>> {
    let mut out = Vec::with_capacity(sfc.nfs.len() + 2);
    if config.pin_endpoints {
        if let Some(ingress) = &sfc.ingress {
            out.push(ChainPosition::Ingress(ingress));
        }
    }
    out.extend((0..sfc.nfs.len()).map(ChainPosition::Nf));
    if config.pin_endpoints {
        if let Some(egress) = &sfc.egress {
            out.push(ChainPosition::Egress(egress));
        }
    }
    out
}
