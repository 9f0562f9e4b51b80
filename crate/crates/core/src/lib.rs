//! Cost-aware placement of network slices.
//!
//! A network slice is a set of service function chains (SFCs); each chain is
//! an ordered list of network functions (NFs) that must be deployed on the
//! hosts of a multi-data-center substrate. This crate places every function
//! so that the number of active hosts is minimal, while every node keeps
//! within its resource capacity, every chain meets its end-to-end latency
//! budget and every link carries no more than its bandwidth.
//!
//! The crate is organized as:
//!
//! - [`model`]: substrate and request types, validation, authorized-node
//!   resolution, eligible node pairs and residual accounting.
//! - [`milp`]: the mixed-integer formulation (big-M linearized) as a
//!   solver-agnostic model, with LP-format export.
//! - [`solver`]: an exact branch-and-bound over function assignments, a
//!   brute-force oracle, and a reader for external-solver solution files.
//! - [`verify`]: an independent feasibility checker.
//! - [`orchestrator`]: the re-optimization loop that reacts to new or updated
//!   slice requests.
//! - [`scenario`] and [`experiment`]: seeded workload generation, the sweep
//!   presets, and the statistics harness.
//!
//! The book under `book/` walks through each of these with runnable snippets.

pub mod experiment;
pub mod io;
pub mod milp;
pub mod model;
pub mod orchestrator;
pub mod scenario;
pub mod solver;
pub mod verify;

pub use model::{
    NfKey, NfSpec, NodeId, PlacementSolution, ResourceVector, SfcSpec, SliceRequest, SolveStatus, SubstrateGraph,
};

// Book chapters are compiled as doctests so the snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/formulation.md")]
    mod formulation {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/orchestration.md")]
    mod orchestration {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
