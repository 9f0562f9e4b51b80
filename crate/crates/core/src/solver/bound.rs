//! Root lower bound from host subsets.
//!
//! A placement with `k` active nodes uses exactly `k` hosts, so some
//! `k`-subset must cover every function's authorized set and hold, per kind,
//! the demand of every function confined to it.

use std::collections::BTreeSet;

use itertools::Itertools;

use super::search::Problem;

/// Subsets enumerated per size before giving up on the refinement.
const MAX_SUBSETS: u64 = 200_000;
/// Distinct candidate sets checked individually.
const MAX_GROUPS: usize = 64;

struct Group {
    members: Vec<bool>,
    demand: Vec<f64>,
}

/// Smallest `k >= from` for which some `k`-subset of hosts passes the
/// covering and capacity checks, together with the passing subsets. Stops
/// with no subsets when enumeration would be too large.
pub(crate) fn subset_bound(p: &Problem, from: usize) -> (usize, Vec<Vec<usize>>) {
    let hosts: Vec<usize> = p
        .nfs
        .iter()
        .flat_map(|nf| nf.candidates.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let groups = groups(p);
    let nk = p.nk();
    let mut k = from.max(1);
    while k <= hosts.len() {
        if binomial(hosts.len() as u64, k as u64) > MAX_SUBSETS {
            return (k, Vec::new());
        }
        let passing: Vec<Vec<usize>> = hosts
            .iter()
            .copied()
            .combinations(k)
            .filter(|subset| {
                groups.iter().all(|g| {
                    let inside: Vec<usize> = subset.iter().copied().filter(|&v| g.members[v]).collect();
                    !inside.is_empty()
                        && (0..nk).all(|r| {
                            let room: f64 = inside.iter().map(|&v| p.cap[v * nk + r]).sum();
                            g.demand[r] <= room + 1e-9
                        })
                })
            })
            .collect();
        if !passing.is_empty() {
            return (k, passing);
        }
        k += 1;
    }
    (k, Vec::new())
}

/// One group per distinct candidate set, carrying the demand of every
/// function whose candidates lie inside it. Falls back to the union alone
/// when there are too many distinct sets.
fn groups(p: &Problem) -> Vec<Group> {
    let sets: BTreeSet<&[usize]> = p.nfs.iter().map(|nf| nf.candidates.as_slice()).collect();
    let union: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let chosen: Vec<Vec<usize>> = if sets.len() <= MAX_GROUPS {
        sets.into_iter().map(<[usize]>::to_vec).collect()
    } else {
        vec![union]
    };
    chosen
        .into_iter()
        .map(|set| {
            let mut members = vec![false; p.n()];
            for &v in &set {
                members[v] = true;
            }
            let mut demand = vec![0.0; p.nk()];
            for nf in p.nfs.iter().filter(|nf| nf.candidates.iter().all(|&v| members[v])) {
                for (d, x) in demand.iter_mut().zip(&nf.demand) {
                    *d += x;
                }
            }
            Group { members, demand }
        })
        .collect()
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::binomial;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 5), 1);
    }
}
