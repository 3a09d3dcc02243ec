use std::collections::BTreeSet;

use proptest::prelude::*;

use nsga3_core::benchmarks::{Family, ProblemSpec};
use nsga3_core::bits::{standard_bit_mutation, BitString};
use nsga3_core::dynamics::max_antichain_oracle;
use nsga3_core::dynamics::oracles::{
    all_bit_strings, brute_force_layers, exhaustive_front, fitness_image,
};
use nsga3_core::engine::PopulationUpdate;
use nsga3_core::normalization::NormalizerState;
use nsga3_core::objective::ObjectiveVector;
use nsga3_core::refpoints::ReferencePointSet;
use nsga3_core::rng::RandomSource;
use nsga3_core::sorting::non_dominated_sort;

fn vectors(
    d: usize,
    max: u32,
    len: std::ops::Range<usize>,
) -> impl Strategy<Value = Vec<ObjectiveVector>> {
    prop::collection::vec(
        prop::collection::vec(0..=max, d).prop_map(ObjectiveVector::new),
        len,
    )
}

fn layer_sets(items: &[ObjectiveVector], layers: &[Vec<usize>]) -> Vec<BTreeSet<ObjectiveVector>> {
    layers
        .iter()
        .map(|l| l.iter().map(|&i| items[i].clone()).collect())
        .collect()
}

proptest! {
    #[test]
    fn dominance_is_a_partial_order(vs in vectors(3, 4, 3..4)) {
        let (u, v, w) = (&vs[0], &vs[1], &vs[2]);
        prop_assert!(u.weakly_dominates(u));
        prop_assert!(!u.strictly_dominates(u));
        if u.weakly_dominates(v) && v.weakly_dominates(u) {
            prop_assert_eq!(u, v);
        }
        if u.weakly_dominates(v) && v.weakly_dominates(w) {
            prop_assert!(u.weakly_dominates(w));
        }
        if u.strictly_dominates(v) {
            prop_assert!(!v.weakly_dominates(u));
        }
    }

    #[test]
    fn sort_matches_peeling(d in 1usize..5, seed in any::<u64>(), len in 1usize..65) {
        let mut rng = RandomSource::new(seed);
        let items: Vec<ObjectiveVector> = (0..len)
            .map(|_| ObjectiveVector::new((0..d).map(|_| rng.below(6) as u32).collect()))
            .collect();
        prop_assert_eq!(non_dominated_sort(&items).unwrap(), brute_force_layers(&items));
    }

    #[test]
    fn sort_is_permutation_invariant(items in vectors(2, 6, 1..40), seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        let mut shuffled = items.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i + 1));
        }
        let a = layer_sets(&items, &non_dominated_sort(&items).unwrap());
        let b = layer_sets(&shuffled, &non_dominated_sort(&shuffled).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normalization_preserves_dominance(items in vectors(4, 12, 2..40)) {
        let layers = non_dominated_sort(&items).unwrap();
        let pool: Vec<usize> = (0..items.len()).collect();
        let mut state = NormalizerState::new(4, 12.0);
        let map = state.normalize_generation(&items, &layers, &pool).unwrap();
        let normalized: Vec<Vec<f64>> = items.iter().map(|v| map.apply(v)).collect();
        for (x, fx) in items.iter().zip(&normalized) {
            for (y, fy) in items.iter().zip(&normalized) {
                let raw = (0..4).filter(|&j| !map.degenerate[j]).all(|j| x[j] <= y[j]);
                let norm = (0..4).filter(|&j| !map.degenerate[j]).all(|j| fx[j] <= fy[j]);
                prop_assert_eq!(raw, norm);
            }
        }
    }

    #[test]
    fn association_is_scale_invariant(v in prop::collection::vec(0.0f64..1.0, 3), shift in -4i32..5) {
        prop_assume!(v.iter().any(|&x| x > 0.0));
        let refs = ReferencePointSet::generate(12, 3).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * 2f64.powi(shift)).collect();
        prop_assert_eq!(refs.associate(&v).unwrap().index, refs.associate(&scaled).unwrap().index);
    }

    #[test]
    fn association_matches_oracle(v in prop::collection::vec(0.0f64..1.0, 4)) {
        let refs = ReferencePointSet::generate(9, 4).unwrap();
        prop_assert_eq!(refs.associate(&v).unwrap(), refs.associate_oracle(&v).unwrap());
    }
}

fn small_specs() -> Vec<ProblemSpec> {
    let mut specs = Vec::new();
    for n in [2, 4, 6, 8, 10, 12] {
        specs.push(ProblemSpec::lotz(n, 2).unwrap());
        specs.push(ProblemSpec::omm(n, 2).unwrap());
        specs.push(ProblemSpec::cocz(n, 2).unwrap());
    }
    for n in [4, 8, 12] {
        specs.push(ProblemSpec::lotz(n, 4).unwrap());
        specs.push(ProblemSpec::omm(n, 4).unwrap());
        specs.push(ProblemSpec::cocz(n, 4).unwrap());
    }
    for (n, d, k) in [
        (8, 2, 2),
        (10, 2, 3),
        (12, 2, 4),
        (12, 4, 2),
        (8, 4, 2),
        (12, 4, 6),
    ] {
        specs.push(ProblemSpec::ojzj(n, d, k).unwrap());
    }
    specs.push(ProblemSpec::rrmo(10, 2).unwrap());
    specs
}

#[test]
fn exhaustive_front_matches_closed_form() {
    for spec in small_specs() {
        let closed: BTreeSet<_> = spec.enumerate_front().unwrap().into_iter().collect();
        assert_eq!(closed.len() as u128, spec.front_size(), "{spec}");
        let front = exhaustive_front(&spec).unwrap();
        assert_eq!(front, closed, "{spec}");
    }
}

#[test]
fn pareto_predicate_matches_exhaustive_search() {
    for spec in small_specs() {
        let front = exhaustive_front(&spec).unwrap();
        for x in all_bit_strings(spec.n()).unwrap() {
            let v = spec.evaluate(&x).unwrap();
            assert_eq!(
                spec.is_pareto_optimal(&x).unwrap(),
                front.contains(&v),
                "{spec} {x}"
            );
            assert_eq!(spec.is_front_vector(&v), front.contains(&v), "{spec} {v}");
        }
    }
}

fn image_antichain(spec: &ProblemSpec) -> u128 {
    let image = fitness_image(spec).unwrap();
    max_antichain_oracle(&image).unwrap() as u128
}

#[test]
fn antichains_match_closed_forms() {
    for n in 1..=12 {
        let lotz = ProblemSpec::lotz(n, 2).unwrap();
        assert_eq!(image_antichain(&lotz), n as u128 + 1, "{lotz}");
    }
    for d in [2, 4] {
        for n in (d..=12).step_by(d) {
            let cocz = ProblemSpec::cocz(n, d).unwrap();
            let expected = ((n / d + 1) as u128).pow(d as u32 / 2);
            assert_eq!(image_antichain(&cocz), expected, "{cocz}");
        }
        for n in (d / 2..=12).step_by(d / 2) {
            let omm = ProblemSpec::omm(n, d).unwrap();
            let expected = ((2 * n / d + 1) as u128).pow(d as u32 / 2);
            assert_eq!(image_antichain(&omm), expected, "{omm}");
        }
    }
}

#[test]
fn lotz_four_objectives_inside_bounds() {
    for n in [8, 12] {
        let spec = ProblemSpec::lotz(n, 4).unwrap();
        let bound = spec.incomparable_set_bound();
        let width = image_antichain(&spec);
        assert!(
            bound.lower.unwrap() <= width && width <= bound.upper,
            "{spec}: {width} vs {bound:?}"
        );
    }
}

#[test]
fn antichain_matches_bounds_for_every_family() {
    for spec in small_specs() {
        let bound = spec.incomparable_set_bound();
        let width = image_antichain(&spec);
        assert!(width <= bound.upper, "{spec}: {width} > {}", bound.upper);
        if spec.family() != Family::Rrmo {
            assert!(
                bound.lower.unwrap() <= width,
                "{spec}: {width} vs {bound:?}"
            );
        }
    }
}

#[test]
fn unchanged_offspring_rate() {
    let n = 50;
    let mut rng = RandomSource::new(99);
    let x = BitString::random(n, &mut rng);
    let trials = 100_000;
    let same = (0..trials)
        .filter(|_| standard_bit_mutation(&x, &mut rng) == x)
        .count();
    let expected = (1.0 - 1.0 / n as f64).powi(n as i32);
    assert!((same as f64 / trials as f64 - expected).abs() <= 0.02);
}

#[test]
fn leftover_frequency() {
    let mut rng = RandomSource::new(4);
    for mu in [4usize, 5, 18] {
        let rounds = 10_000;
        let mut hits = 0;
        for _ in 0..rounds {
            let (pool, rest) = PopulationUpdate::Stochastic
                .subsample(2 * mu, &mut rng)
                .unwrap();
            assert_eq!((pool.len(), rest.len()), ((3 * mu).div_ceil(2), mu / 2));
            hits += usize::from(rest.contains(&0));
        }
        let expected = (mu / 2) as f64 / (2 * mu) as f64;
        assert!(
            (hits as f64 / rounds as f64 - expected).abs() <= 0.02,
            "mu={mu}"
        );
    }
}
