//! Greedy constructions that seed the search with an incumbent.

use super::search::{Problem, State};
use super::PruneRules;

/// Root-bound subsets tried by the restricted packing.
const MAX_TARGETS: usize = 64;

#[derive(Clone, Copy)]
enum Choice {
    /// Lowest-index active candidate, else lowest-index inactive one.
    FirstFit,
    /// Neighbour's node, then the tightest active fit, then the roomiest
    /// inactive node.
    BestFit,
}

/// Best assignment found by the portfolio, as `(objective, assignment)`.
/// `targets` are host subsets of the root-bound size worth packing into.
pub(crate) fn portfolio(p: &Problem, root_lb: usize, targets: &[Vec<usize>]) -> Option<(usize, Vec<usize>)> {
    let chain_order: Vec<usize> = (0..p.nfs.len()).collect();
    let mut decreasing = chain_order.clone();
    let size = |i: usize| -> f64 {
        (0..p.nk())
            .map(|k| p.nfs[i].demand[k] / max_capacity(p, k).max(f64::MIN_POSITIVE))
            .sum()
    };
    decreasing.sort_by(|&a, &b| size(b).total_cmp(&size(a)).then(a.cmp(&b)));

    let mut best: Option<(usize, Vec<usize>)> = None;

    for order in [&chain_order, &decreasing] {
        for choice in [Choice::FirstFit, Choice::BestFit] {
            consider(&mut best, greedy(p, order, choice, None));
        }
    }

    let mut ranked: Vec<&Vec<usize>> = targets.iter().collect();
    ranked.sort_by(|a, b| tightness(p, b).total_cmp(&tightness(p, a)).then(a.cmp(b)));
    for subset in ranked.into_iter().take(MAX_TARGETS) {
        if best.as_ref().is_some_and(|(o, _)| *o <= subset.len()) {
            break;
        }
        let mut allowed = vec![false; p.n()];
        for &v in subset {
            allowed[v] = true;
        }
        for order in [&decreasing, &chain_order] {
            consider(&mut best, greedy(p, order, Choice::BestFit, Some(&allowed)));
        }
    }

    // Pack into the k roomiest hosts for small k.
    let hosts = ranked_hosts(p);
    let top = best.as_ref().map_or(hosts.len(), |(o, _)| *o);
    for k in root_lb.max(1)..top.min(hosts.len() + 1) {
        let mut allowed = vec![false; p.n()];
        for &v in &hosts[..k] {
            allowed[v] = true;
        }
        let before = best.as_ref().map(|(o, _)| *o);
        for order in [&decreasing, &chain_order] {
            consider(&mut best, greedy(p, order, Choice::BestFit, Some(&allowed)));
        }
        if best.as_ref().map(|(o, _)| *o) != before {
            break;
        }
    }
    best
}

/// Smallest spare fraction over kinds once all demand sits on `subset`.
fn tightness(p: &Problem, subset: &[usize]) -> f64 {
    let nk = p.nk();
    (0..nk)
        .map(|k| {
            let room: f64 = subset.iter().map(|&v| p.cap[v * nk + k]).sum();
            let demand: f64 = p.nfs.iter().map(|nf| nf.demand[k]).sum();
            if room > 0.0 { (room - demand) / room } else { f64::INFINITY }
        })
        .fold(f64::INFINITY, f64::min)
}

fn consider(best: &mut Option<(usize, Vec<usize>)>, found: Option<Vec<usize>>) {
    let Some(assign) = found else { return };
    let obj = objective(&assign);
    let better = match best {
        None => true,
        Some((o, a)) => obj < *o || (obj == *o && assign < *a),
    };
    if better {
        *best = Some((obj, assign));
    }
}

fn objective(assign: &[usize]) -> usize {
    let mut nodes = assign.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    nodes.len()
}

fn max_capacity(p: &Problem, k: usize) -> f64 {
    (0..p.n()).map(|v| p.cap[v * p.nk() + k]).fold(0.0, f64::max)
}

/// Hosts by decreasing normalized total capacity.
fn ranked_hosts(p: &Problem) -> Vec<usize> {
    let scale: Vec<f64> = (0..p.nk()).map(|k| max_capacity(p, k).max(f64::MIN_POSITIVE)).collect();
    let room = |v: usize| -> f64 { (0..p.nk()).map(|k| p.cap[v * p.nk() + k] / scale[k]).sum() };
    let mut hosts: Vec<usize> = (0..p.n())
        .filter(|&v| p.nfs.iter().any(|nf| nf.candidates.contains(&v)))
        .collect();
    hosts.sort_by(|&a, &b| room(b).total_cmp(&room(a)).then(a.cmp(&b)));
    hosts
}

fn greedy(p: &Problem, order: &[usize], choice: Choice, allowed: Option<&[bool]>) -> Option<Vec<usize>> {
    let rules = PruneRules::default();
    let mut state = State::new(p);
    let nk = p.nk();
    for &i in order {
        let nf = &p.nfs[i];
        let mut candidates: Vec<usize> = nf
            .candidates
            .iter()
            .copied()
            .filter(|&v| allowed.is_none_or(|a| a[v]))
            .collect();
        match choice {
            Choice::FirstFit => {
                candidates.sort_by_key(|&v| (!state.is_active(v), v));
            }
            Choice::BestFit => {
                let neighbours: Vec<usize> = nf
                    .hops
                    .iter()
                    .flat_map(|&h| {
                        let hop = &p.hops[h];
                        [hop.from, hop.to]
                    })
                    .filter_map(|a| match a {
                        super::search::Anchor::Nf(j) if j != i => state.placed_node(j),
                        _ => None,
                    })
                    .collect();
                let slack = |v: usize| -> f64 {
                    (0..nk)
                        .map(|k| {
                            let cap = p.cap[v * nk + k].max(f64::MIN_POSITIVE);
                            (state.free(p, v, k) - nf.demand[k]) / cap
                        })
                        .sum()
                };
                candidates.sort_by(|&a, &b| {
                    let rank = |v: usize| (!neighbours.contains(&v), !state.is_active(v));
                    rank(a).cmp(&rank(b)).then_with(|| {
                        if state.is_active(a) {
                            slack(a).total_cmp(&slack(b))
                        } else {
                            slack(b).total_cmp(&slack(a))
                        }
                        .then(a.cmp(&b))
                    })
                });
            }
        }
        if !candidates.into_iter().any(|v| state.place(p, i, v, &rules)) {
            return None;
        }
    }
    Some(state.assign)
}
