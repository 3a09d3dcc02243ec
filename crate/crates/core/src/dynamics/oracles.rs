//! Slow reference implementations used to cross-check the fast paths.

use std::borrow::Borrow;
use std::collections::BTreeSet;

use crate::benchmarks::ProblemSpec;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

/// Largest `n` for which the search space is enumerated.
pub const EXHAUSTIVE_MAX_N: usize = 20;

/// Non-dominated layers by repeated quadratic peeling. Indices inside each
/// layer are ascending.
pub fn brute_force_layers<V: Borrow<ObjectiveVector>>(items: &[V]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..items.len()).collect();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let (layer, rest): (Vec<usize>, Vec<usize>) = remaining.iter().partition(|&&i| {
            !remaining
                .iter()
                .any(|&j| items[j].borrow().strictly_dominates(items[i].borrow()))
        });
        layers.push(layer);
        remaining = rest;
    }
    layers
}

/// Every bit string of length `spec.n()`, in binary counting order.
pub fn all_bit_strings(n: usize) -> Result<impl Iterator<Item = BitString>> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::OracleTooLarge {
            size: n,
            cap: EXHAUSTIVE_MAX_N,
        });
    }
    Ok((0u64..1u64 << n)
        .map(move |w| BitString::from_bits((0..n).map(|i| w >> i & 1 == 1).collect())))
}

/// The set of objective vectors reached by some bit string.
pub fn fitness_image(spec: &ProblemSpec) -> Result<BTreeSet<ObjectiveVector>> {
    let mut image = BTreeSet::new();
    for x in all_bit_strings(spec.n())? {
        image.insert(spec.evaluate(&x)?);
    }
    Ok(image)
}

/// The non-dominated subset of the fitness image.
pub fn exhaustive_front(spec: &ProblemSpec) -> Result<BTreeSet<ObjectiveVector>> {
    let image: Vec<ObjectiveVector> = fitness_image(spec)?.into_iter().collect();
    Ok(brute_force_layers(&image)
        .into_iter()
        .next()
        .unwrap_or_default()
        .into_iter()
        .map(|i| image[i].clone())
        .collect())
}

/// Whether `x` is Pareto optimal, decided against an exhaustively computed
/// front.
pub fn exhaustive_is_pareto(
    spec: &ProblemSpec,
    front: &BTreeSet<ObjectiveVector>,
    x: &BitString,
) -> Result<bool> {
    Ok(front.contains(&spec.evaluate(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sorting::non_dominated_sort;

    #[test]
    fn layers_match_fast_sort() {
        let vs: Vec<ObjectiveVector> = [[0, 3], [1, 1], [3, 0], [1, 1], [0, 0], [2, 2]]
            .into_iter()
            .map(ObjectiveVector::from)
            .collect();
        assert_eq!(brute_force_layers(&vs), non_dominated_sort(&vs).unwrap());
    }

    #[test]
    fn omm_front() {
        let spec = ProblemSpec::omm(6, 2).unwrap();
        let front = exhaustive_front(&spec).unwrap();
        let closed: BTreeSet<_> = spec.enumerate_front().unwrap().into_iter().collect();
        assert_eq!(front, closed);
    }
}
