//! Exact placement by branch-and-bound over function assignments.
//!
//! Once every function has a node, the routing binaries, the active set and
//! the hop latency allotments of the mixed-integer model are all implied, so
//! the search only branches on assignments. Functions are assigned in chain
//! order and candidates are tried in lexicographic node order, which makes
//! the first optimal leaf the lexicographically smallest optimum.
//!
//! ```
//! use netslice_core::model::*;
//! use netslice_core::solver::{solve_exact, SolverLimits};
//!
//! let chars = NodeCharacteristics { security_level: 1, iaas_id: 1 };
//! let graph = SubstrateGraph {
//!     nodes: vec![SubstrateNode::host("v1", ResourceVector::from_pairs([("cpu", 4.0)]), chars)],
//!     links: vec![],
//! };
//! let request = SliceRequest {
//!     slice_id: "s1".into(),
//!     revision: 1,
//!     sfcs: vec![SfcSpec {
//!         id: "f1".into(),
//!         nfs: vec![NfSpec::new("j1", ResourceVector::from_pairs([("cpu", 2.0)]))],
//!         latency_budget: 10.0,
//!         hop_bandwidth: 1.0,
//!         ingress: None,
//!         egress: None,
//!     }],
//! };
//! let sol = solve_exact(&graph, &[request], &RoutingConfig::default(), &SolverLimits::default());
//! assert_eq!(sol.status, SolveStatus::Optimal);
//! assert_eq!(sol.objective, 1);
//! ```

mod bound;
mod brute;
mod heuristics;
pub(crate) mod search;
mod solution_file;

use std::time::{Duration, Instant};

use crate::model::{PlacementSolution, RoutingConfig, SliceRequest, SolveStatus, SubstrateGraph};

pub use brute::{brute_force_optimum, BruteForceError, BRUTE_FORCE_MAX_HOSTS, BRUTE_FORCE_MAX_NFS};
pub use solution_file::{parse_solution_file, SolutionFileError};

use search::{Problem, Search, SearchLimits, Stop};

/// Budgets for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverLimits {
    /// Wall-clock budget.
    pub time_budget: Option<Duration>,
    /// Maximum number of search-tree nodes.
    pub node_budget: Option<u64>,
    /// Stop as soon as an incumbent this good is found.
    pub objective_cutoff: Option<usize>,
    /// Search nodes spent looking for a lexicographically smaller optimum
    /// once the objective is known to be optimal.
    pub tie_break_nodes: u64,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            time_budget: None,
            node_budget: None,
            objective_cutoff: None,
            tie_break_nodes: 20_000,
        }
    }
}

impl SolverLimits {
    pub fn with_time_budget(seconds: f64) -> Self {
        SolverLimits {
            time_budget: Some(Duration::from_secs_f64(seconds)),
            ..Default::default()
        }
    }
}

/// Which pruning rules the search applies while descending. A disabled rule
/// is checked only on complete assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneRules {
    pub capacity: bool,
    pub latency: bool,
    pub bandwidth: bool,
    pub bound: bool,
}

impl Default for PruneRules {
    fn default() -> Self {
        PruneRules {
            capacity: true,
            latency: true,
            bandwidth: true,
            bound: true,
        }
    }
}

/// Minimum-active-node placement of `requests` on `graph`.
pub fn solve_exact(
    graph: &SubstrateGraph,
    requests: &[SliceRequest],
    config: &RoutingConfig,
    limits: &SolverLimits,
) -> PlacementSolution {
    solve_with_rules(graph, requests, config, limits, PruneRules::default())
}

/// [`solve_exact`] with a chosen set of pruning rules.
pub fn solve_with_rules(
    graph: &SubstrateGraph,
    requests: &[SliceRequest],
    config: &RoutingConfig,
    limits: &SolverLimits,
    rules: PruneRules,
) -> PlacementSolution {
    let start = Instant::now();
    let mut problem = match Problem::new(graph, requests, config) {
        Ok(p) => p,
        Err(reason) => return PlacementSolution::infeasible(reason),
    };
    if problem.nfs.is_empty() {
        return PlacementSolution::empty(SolveStatus::Optimal);
    }
    if rules.capacity {
        if let Some(i) = problem.filter_by_capacity() {
            return PlacementSolution::infeasible(format!(
                "capacity: {} demands more than any authorized host offers",
                problem.nfs[i].key
            ));
        }
    }
    if let Some(kind) = problem.aggregate_shortfall() {
        return PlacementSolution::infeasible(format!("capacity: total `{kind}` demand exceeds total host capacity"));
    }

    let (root_lb, targets) = if rules.bound {
        let lb = search::State::new(&problem).lower_bound(&problem, 0).unwrap_or(usize::MAX);
        bound::subset_bound(&problem, lb)
    } else {
        (0, Vec::new())
    };
    let incumbent = heuristics::portfolio(&problem, root_lb, &targets);
    let mut search = Search::new(
        &problem,
        rules,
        root_lb,
        incumbent,
        SearchLimits {
            deadline: limits.time_budget.map(|d| start + d),
            node_budget: limits.node_budget,
            cutoff: limits.objective_cutoff,
            tie_break_nodes: limits.tie_break_nodes,
        },
    );
    let stop = search.run();
    let proven = rules.bound && search.best.as_ref().is_some_and(|(o, _)| *o == root_lb);
    match (&search.best, stop) {
        (Some((_, assign)), Stop::Proven) => problem.solution(assign, SolveStatus::Optimal),
        (Some((_, assign)), Stop::Limit) => {
            let status = if proven { SolveStatus::Optimal } else { SolveStatus::Timeout };
            problem.solution(assign, status)
        }
        (None, Stop::Proven) => {
            PlacementSolution::infeasible("no assignment satisfies the routing, latency and bandwidth constraints")
        }
        (None, Stop::Limit) => {
            let mut sol = PlacementSolution::empty(SolveStatus::Timeout);
            sol.diagnostics = Some("budget exhausted before any feasible assignment was found".into());
            sol
        }
    }
}
