//! The re-optimization control loop.
//!
//! Every new or updated slice request triggers a solve. In
//! [`OrchestratorMode::FullReopt`] all active requests are re-planned
//! together, so existing functions may move; in
//! [`OrchestratorMode::Incremental`] only the new request is placed, on the
//! residual substrate left by the others. An update (same slice id, higher
//! revision) releases the previous revision's resources before it is solved.
//!
//! ```
//! use std::collections::VecDeque;
//! use std::sync::atomic::AtomicBool;
//! use netslice_core::model::SubstrateGraph;
//! use netslice_core::orchestrator::{run_loop, OrchestratorConfig, OrchestratorState};
//! use netslice_core::io::TimedRequest;
//!
//! let state = OrchestratorState::new(SubstrateGraph::default(), OrchestratorConfig::default());
//! let mut source: VecDeque<TimedRequest> = VecDeque::new();
//! let state = run_loop(state, &mut source, &AtomicBool::new(false));
//! assert!(state.events().is_empty());
//! ```

use std::collections::VecDeque;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::io::TimedRequest;
use crate::model::{
    residual_apply, validate, PlacementSolution, RoutingConfig, SliceRequest, SolveStatus, SubstrateGraph,
    ValidationError,
};
use crate::solver::{solve_exact, SolverLimits};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OrchestratorMode {
    #[default]
    FullReopt,
    Incremental,
}

impl std::str::FromStr for OrchestratorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "full_reopt" => Ok(OrchestratorMode::FullReopt),
            "incremental" => Ok(OrchestratorMode::Incremental),
            other => Err(format!("unknown orchestration mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OrchestratorConfig {
    pub mode: OrchestratorMode,
    pub routing: RoutingConfig,
    pub limits: SolverLimits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    RequestAccepted,
    Placed,
    RejectedInfeasible,
    Replanned,
    /// The request failed validation or carried a stale revision.
    RejectedInvalid,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("event kind serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

/// One entry of the append-only decision log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    pub kind: EventKind,
    pub slice_id: String,
    pub revision: u64,
    /// Active nodes of the consolidated placement after the decision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SubmitError {
    #[error("slice `{slice}` revision {submitted} is not newer than stored revision {stored}")]
    StaleRevision { slice: String, stored: u64, submitted: u64 },
    #[error("request is invalid: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationError>),
}

/// Base substrate, active requests, the consolidated placement and the log.
#[derive(Debug, Clone)]
pub struct OrchestratorState {
    base: SubstrateGraph,
    config: OrchestratorConfig,
    /// Active requests in arrival order.
    requests: Vec<SliceRequest>,
    solution: PlacementSolution,
    events: Vec<Event>,
}

impl OrchestratorState {
    pub fn new(base: SubstrateGraph, config: OrchestratorConfig) -> Self {
        OrchestratorState {
            base,
            config,
            requests: Vec::new(),
            solution: PlacementSolution::empty(SolveStatus::Optimal),
            events: Vec::new(),
        }
    }

    pub fn base(&self) -> &SubstrateGraph {
        &self.base
    }

    pub fn mode(&self) -> OrchestratorMode {
        self.config.mode
    }

    pub fn requests(&self) -> &[SliceRequest] {
        &self.requests
    }

    pub fn solution(&self) -> &PlacementSolution {
        &self.solution
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Substrate left after every active placement.
    pub fn residual(&self) -> SubstrateGraph {
        residual_apply(&self.base, &self.requests, &self.solution, &self.config.routing)
            .expect("consolidated placement fits the base substrate")
    }

    /// Place a new request or re-plan an updated one. Returns the decision
    /// event (PLACED, REPLANNED or REJECTED_INFEASIBLE). Errors leave the
    /// state untouched and log nothing.
    pub fn submit(&mut self, request: SliceRequest, at: Option<f64>) -> Result<Event, SubmitError> {
        let problems = validate(&self.base, std::slice::from_ref(&request));
        if !problems.is_empty() {
            return Err(SubmitError::Invalid(problems));
        }
        let prior = self.requests.iter().position(|r| r.slice_id == request.slice_id);
        if let Some(i) = prior {
            let stored = self.requests[i].revision;
            if request.revision <= stored {
                return Err(SubmitError::StaleRevision {
                    slice: request.slice_id.clone(),
                    stored,
                    submitted: request.revision,
                });
            }
        }

        self.log(EventKind::RequestAccepted, &request, at, None);

        let mut others = self.requests.clone();
        let mut kept = self.solution.clone();
        if let Some(i) = prior {
            others.remove(i);
            kept.remove_slice(&request.slice_id);
        }

        let routing = self.config.routing;
        let limits = &self.config.limits;
        let outcome = match self.config.mode {
            OrchestratorMode::FullReopt => {
                let mut all = others.clone();
                all.push(request.clone());
                let sol = solve_exact(&self.base, &all, &routing, limits);
                if sol.has_placement() {
                    Ok(sol)
                } else {
                    Err(sol.diagnostics)
                }
            }
            OrchestratorMode::Incremental => {
                let residual = residual_apply(&self.base, &others, &kept, &routing)
                    .expect("placements of other requests fit the base substrate");
                let sol = solve_exact(&residual, std::slice::from_ref(&request), &routing, limits);
                if sol.has_placement() {
                    kept.status = sol.status;
                    kept.absorb(&sol);
                    Ok(kept)
                } else {
                    Err(sol.diagnostics)
                }
            }
        };

        let event = match outcome {
            Ok(mut sol) => {
                sol.refresh_active();
                self.solution = sol;
                match prior {
                    Some(i) => self.requests[i] = request.clone(),
                    None => self.requests.push(request.clone()),
                }
                let kind = if prior.is_some() { EventKind::Replanned } else { EventKind::Placed };
                self.log(kind, &request, at, None)
            }
            Err(reason) => self.log(EventKind::RejectedInfeasible, &request, at, reason),
        };
        Ok(event)
    }

    fn log(&mut self, kind: EventKind, request: &SliceRequest, at: Option<f64>, detail: Option<String>) -> Event {
        let event = Event {
            seq: self.events.len() as u64 + 1,
            at,
            kind,
            slice_id: request.slice_id.clone(),
            revision: request.revision,
            active_nodes: Some(self.solution.active_nodes.len()),
            detail,
        };
        self.events.push(event.clone());
        event
    }

    fn log_rejection(&mut self, request: &SliceRequest, at: Option<f64>, error: &SubmitError) {
        self.log(EventKind::RejectedInvalid, request, at, Some(error.to_string()));
    }
}

/// Result of polling a [`RequestSource`].
#[derive(Debug, Clone, PartialEq)]
pub enum Next {
    Request(TimedRequest),
    /// Nothing arrived within the wait.
    Idle,
    /// No more requests will arrive.
    Closed,
}

/// Ordered supply of slice requests for [`run_loop`].
pub trait RequestSource {
    fn poll_next(&mut self, wait: Duration) -> Next;
}

impl RequestSource for VecDeque<TimedRequest> {
    fn poll_next(&mut self, _wait: Duration) -> Next {
        self.pop_front().map_or(Next::Closed, Next::Request)
    }
}

impl RequestSource for mpsc::Receiver<TimedRequest> {
    fn poll_next(&mut self, wait: Duration) -> Next {
        match self.recv_timeout(wait) {
            Ok(r) => Next::Request(r),
            Err(mpsc::RecvTimeoutError::Timeout) => Next::Idle,
            Err(mpsc::RecvTimeoutError::Disconnected) => Next::Closed,
        }
    }
}

const POLL_WAIT: Duration = Duration::from_millis(50);

/// Feed requests from `source` into `state` until the source closes or
/// `stop` is raised. Submission errors become REJECTED_INVALID events.
pub fn run_loop(
    mut state: OrchestratorState,
    source: &mut impl RequestSource,
    stop: &AtomicBool,
) -> OrchestratorState {
    while !stop.load(Ordering::SeqCst) {
        match source.poll_next(POLL_WAIT) {
            Next::Request(timed) => {
                if let Err(e) = state.submit(timed.request.clone(), timed.at) {
                    state.log_rejection(&timed.request, timed.at, &e);
                }
            }
            Next::Idle => {}
            Next::Closed => break,
        }
    }
    state
}

/// Serialize events as one JSON object per line.
pub fn events_to_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}
