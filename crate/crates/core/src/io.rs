//! JSON documents for instances, request sequences and solutions.
//!
//! Every document carries a mandatory `"format": 1` key. An instance looks
//! like:
//!
//! ```json
//! {
//!   "format": 1,
//!   "nodes": [{"id": "A", "kind": "host", "capacity": {"cpu": 100},
//!              "characteristics": {"security_level": 1, "iaas_id": 2}}],
//!   "links": [{"endpoints": ["A", "B"], "bandwidth": 50, "latency": 5}],
//!   "slices": [{"slice_id": "S1", "revision": 1, "sfcs": [...]}]
//! }
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{PlacementSolution, SliceRequest, SubstrateGraph, SubstrateLink, SubstrateNode};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedFormat(u32),
}

/// A substrate together with the slice requests to place on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub format: u32,
    pub nodes: Vec<SubstrateNode>,
    #[serde(default)]
    pub links: Vec<SubstrateLink>,
    #[serde(default)]
    pub slices: Vec<SliceRequest>,
}

impl Instance {
    pub fn new(graph: SubstrateGraph, slices: Vec<SliceRequest>) -> Self {
        Instance {
            format: FORMAT_VERSION,
            nodes: graph.nodes,
            links: graph.links,
            slices,
        }
    }

    pub fn graph(&self) -> SubstrateGraph {
        SubstrateGraph {
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocError> {
        let doc: Instance = parse_versioned(text)?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DocError> {
        write(path.as_ref(), &self.to_json())
    }
}

/// A slice request with an optional arrival time in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    #[serde(flatten)]
    pub request: SliceRequest,
}

/// A base substrate and an ordered list of (possibly repeated) requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSequence {
    pub format: u32,
    pub nodes: Vec<SubstrateNode>,
    #[serde(default)]
    pub links: Vec<SubstrateLink>,
    pub requests: Vec<TimedRequest>,
}

impl RequestSequence {
    pub fn graph(&self) -> SubstrateGraph {
        SubstrateGraph {
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocError> {
        parse_versioned(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocError> {
        Self::from_json(&read(path.as_ref())?)
    }
}

pub fn solution_to_json(solution: &PlacementSolution) -> String {
    serde_json::to_string_pretty(solution).expect("solution serializes")
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<PlacementSolution, DocError> {
    Ok(serde_json::from_str(&read(path.as_ref())?)?)
}

#[derive(Deserialize)]
struct VersionProbe {
    format: u32,
}

fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T, DocError> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.format != FORMAT_VERSION {
        return Err(DocError::UnsupportedFormat(probe.format));
    }
    Ok(serde_json::from_str(text)?)
}

pub(crate) fn read(path: &Path) -> Result<String, DocError> {
    fs::read_to_string(path).map_err(|source| DocError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<(), DocError> {
    fs::write(path, text).map_err(|source| DocError::Io {
        path: path.display().to_string(),
        source,
    })
}
