use crate::model::{find_sfc, PlacementSolution, SliceRequest};

use super::{ConstraintFamily, MilpModel, VarId, VarKey, VarKind, VariableIndex};

/// One way a point fails the model.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Row {
        index: usize,
        family: ConstraintFamily,
        amount: f64,
    },
    Bound {
        var: VarId,
        value: f64,
    },
    Integrality {
        var: VarId,
        value: f64,
    },
}

/// Map a placement onto a full model point.
///
/// Binaries come straight from the assignment, routing and active set; each
/// hop allotment comes from `hop_latency_budget`. The per-pair copies take
/// the value their linearization forces: the allotment (latency) and the hop
/// bandwidth on the routed pair, `M` and zero on every other pair.
pub fn encode_solution(
    model: &MilpModel,
    index: &VariableIndex,
    requests: &[SliceRequest],
    solution: &PlacementSolution,
) -> Vec<f64> {
    let mut values = vec![0.0; model.variables.len()];
    for v in &solution.active_nodes {
        if let Some(id) = index.rho(v) {
            values[id] = 1.0;
        }
    }
    for (nf, v) in &solution.assignment {
        if let Some(id) = index.y(nf, v) {
            values[id] = 1.0;
        }
    }
    for (hop, (u, v)) in &solution.routing {
        if let Some(id) = index.z(hop, u, v) {
            values[id] = 1.0;
        }
    }
    for (hop, budget) in &solution.hop_latency_budget {
        if let Some(id) = index.id(&VarKey::PhiL(hop.clone())) {
            values[id] = *budget;
        }
    }
    for (id, key) in index.iter() {
        match key {
            VarKey::PhiLPair(hop, u, v) => {
                let routed = solution.routing.get(hop) == Some(&(u.clone(), v.clone()));
                values[id] = if routed {
                    solution.hop_latency_budget.get(hop).copied().unwrap_or(0.0)
                } else {
                    model.big_m
                };
            }
            VarKey::PhiBPair(hop, u, v) => {
                let routed = solution.routing.get(hop) == Some(&(u.clone(), v.clone()));
                values[id] = if routed {
                    find_sfc(requests, &hop.slice, &hop.sfc).map_or(0.0, |c| c.hop_bandwidth)
                } else {
                    0.0
                };
            }
            _ => {}
        }
    }
    values
}

/// Every row, bound and integrality violation of `values` beyond `tol`.
pub fn evaluate(model: &MilpModel, values: &[f64], tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for var in &model.variables {
        let x = values[var.id];
        if x < var.lower - tol || x > var.upper + tol {
            out.push(Violation::Bound { var: var.id, value: x });
        }
        if var.kind == VarKind::Binary && (x - x.round()).abs() > tol {
            out.push(Violation::Integrality { var: var.id, value: x });
        }
    }
    for (index, row) in model.constraints.iter().enumerate() {
        let amount = row.violation(values);
        if amount > tol {
            out.push(Violation::Row {
                index,
                family: row.family,
                amount,
            });
        }
    }
    out
}
