//! Maximum antichain under Pareto dominance via Dilworth's theorem.
//!
//! Strict dominance is a strict partial order, so its comparability graph is
//! already transitively closed and a minimum chain cover equals
//! `m - |maximum matching|` in the split bipartite graph (left copy `u`,
//! right copy `v`, edge when `u` strictly dominates `v`). By Dilworth the
//! largest antichain has the same size as the smallest chain cover.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

/// Largest number of distinct vectors the oracle accepts.
pub const ANTICHAIN_CAP: usize = 5000;

const NONE: usize = usize::MAX;

/// Size of a largest set of pairwise incomparable vectors among the distinct
/// vectors of `vectors`.
pub fn max_antichain_oracle<'a, I>(vectors: I) -> Result<usize>
where
    I: IntoIterator<Item = &'a ObjectiveVector>,
{
    let distinct: BTreeSet<&ObjectiveVector> = vectors.into_iter().collect();
    let m = distinct.len();
    if m > ANTICHAIN_CAP {
        return Err(Error::OracleTooLarge {
            size: m,
            cap: ANTICHAIN_CAP,
        });
    }
    if let Some(first) = distinct.first() {
        if let Some(bad) = distinct.iter().find(|v| v.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                actual: bad.dim(),
            });
        }
    }
    let vs: Vec<&ObjectiveVector> = distinct.into_iter().collect();
    let adj: Vec<Vec<usize>> = vs
        .iter()
        .map(|u| (0..m).filter(|&j| u.strictly_dominates(vs[j])).collect())
        .collect();
    Ok(m - hopcroft_karp(&adj, m))
}

/// Maximum matching size of a bipartite graph with `adj[left] = rights`.
fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> usize {
    let left = adj.len();
    let mut match_l = vec![NONE; left];
    let mut match_r = vec![NONE; right];
    let mut dist = vec![0usize; left];
    let mut matching = 0;
    loop {
        // BFS layers from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matching;
        }
        for u in 0..left {
            if match_l[u] == NONE && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                matching += 1;
            }
        }
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let w = match_r[v];
        if w == NONE || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}
