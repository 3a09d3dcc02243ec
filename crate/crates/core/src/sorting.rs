//! Non-dominated sorting by dominance-count peeling.
//!
//! Items are grouped by distinct fitness first, so the quadratic work is over
//! distinct vectors only; duplicates always land in the same layer.

use std::borrow::Borrow;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

/// Partitions `items` into layers `F¹, F², …` of item indices (each layer
/// sorted ascending). `F¹` is the set of items no other item strictly
/// dominates.
pub fn non_dominated_sort<V: Borrow<ObjectiveVector>>(items: &[V]) -> Result<Vec<Vec<usize>>> {
    let first = items.first().ok_or(Error::Empty)?.borrow();
    let d = first.dim();

    let mut distinct: Vec<&ObjectiveVector> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut slot: FxHashMap<&ObjectiveVector, usize> = FxHashMap::default();
    for (i, item) in items.iter().enumerate() {
        let v = item.borrow();
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: v.dim(),
            });
        }
        let s = *slot.entry(v).or_insert_with(|| {
            distinct.push(v);
            members.push(Vec::new());
            distinct.len() - 1
        });
        members[s].push(i);
    }

    let m = distinct.len();
    let mut dominated_by = vec![0usize; m];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); m];
    for a in 0..m {
        for b in (a + 1)..m {
            let (mut greater, mut less) = (false, false);
            for (x, y) in distinct[a].iter().zip(distinct[b].iter()) {
                greater |= x > y;
                less |= x < y;
            }
            if greater && !less {
                dominates[a].push(b);
                dominated_by[b] += 1;
            } else if less && !greater {
                dominates[b].push(a);
                dominated_by[a] += 1;
            }
        }
    }

    let mut front: Vec<usize> = (0..m).filter(|&s| dominated_by[s] == 0).collect();
    let mut layers = Vec::new();
    while !front.is_empty() {
        let mut next = Vec::new();
        let mut layer = Vec::new();
        for &s in &front {
            layer.extend_from_slice(&members[s]);
            for &t in &dominates[s] {
                dominated_by[t] -= 1;
                if dominated_by[t] == 0 {
                    next.push(t);
                }
            }
        }
        layer.sort_unstable();
        layers.push(layer);
        front = next;
    }
    Ok(layers)
}

/// Indices of the first layer only.
pub fn first_layer<V: Borrow<ObjectiveVector>>(items: &[V]) -> Result<Vec<usize>> {
    Ok(non_dominated_sort(items)?.swap_remove(0))
}
