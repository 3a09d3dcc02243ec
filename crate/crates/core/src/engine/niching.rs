//! Reference-point niching on the critical layer.

use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::normalization::NormalizedMap;
use crate::objective::ObjectiveVector;
use crate::refpoints::ReferencePointSet;
use crate::rng::RandomSource;

/// Reference point and point-to-point distance of one normalized vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Niche {
    pub reference: usize,
    pub distance: f64,
}

/// Niche of every entry of `fitness` listed in `indices`, each distinct
/// vector associated once. Unlisted entries stay `None`.
pub(crate) fn associate_all(
    fitness: &[&ObjectiveVector],
    indices: impl IntoIterator<Item = usize>,
    map: &NormalizedMap,
    refset: &ReferencePointSet,
) -> Result<Vec<Option<Niche>>> {
    let mut out = vec![None; fitness.len()];
    let mut seen: FxHashMap<&ObjectiveVector, Niche> = FxHashMap::default();
    let mut buf = Vec::new();
    let p = f64::from(refset.p());
    for i in indices {
        let v = fitness[i];
        if let Some(&niche) = seen.get(v) {
            out[i] = Some(niche);
            continue;
        }
        map.apply_into(v, &mut buf);
        let reference = refset.associate(&buf)?.index;
        let distance = buf
            .iter()
            .zip(refset.point(reference))
            .map(|(x, &a)| (x - f64::from(a) / p).powi(2))
            .sum::<f64>()
            .sqrt();
        let niche = Niche {
            reference,
            distance,
        };
        seen.insert(v, niche);
        out[i] = Some(niche);
    }
    Ok(out)
}

type OpenReference = (usize, usize, Vec<(f64, usize)>);

/// Picks `slots` members of `critical` (indices into `fitness`).
///
/// Niche counts start from `selected`. Each round takes the reference point
/// with the fewest members among those that still have candidates, then its
/// candidate closest to the point. Ties are drawn uniformly, niche first, and
/// only when more than one option exists. The result is in ascending order.
pub(crate) fn select(
    fitness: &[&ObjectiveVector],
    selected: &[usize],
    critical: &[usize],
    slots: usize,
    map: &NormalizedMap,
    refset: &ReferencePointSet,
    rng: &mut RandomSource,
) -> Result<Vec<usize>> {
    let niches = associate_all(
        fitness,
        selected.iter().chain(critical).copied(),
        map,
        refset,
    )?;
    let niche = |i: usize| niches[i].expect("associated");
    let mut rho: FxHashMap<usize, usize> = FxHashMap::default();
    for &i in selected {
        *rho.entry(niche(i).reference).or_insert(0) += 1;
    }
    // R' in ascending reference order: (reference, niche count, candidates
    // sorted by distance then index)
    let mut open: Vec<OpenReference> = Vec::new();
    let mut slot: FxHashMap<usize, usize> = FxHashMap::default();
    for &i in critical {
        let Niche {
            reference,
            distance,
        } = niche(i);
        let s = *slot.entry(reference).or_insert_with(|| {
            open.push((
                reference,
                rho.get(&reference).copied().unwrap_or(0),
                Vec::new(),
            ));
            open.len() - 1
        });
        open[s].2.push((distance, i));
    }
    open.sort_unstable_by_key(|e| e.0);
    for entry in &mut open {
        entry
            .2
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    let mut chosen = Vec::with_capacity(slots);
    let mut ties = Vec::new();
    while chosen.len() < slots && !open.is_empty() {
        let best = open.iter().map(|e| e.1).min().expect("non-empty");
        ties.clear();
        ties.extend((0..open.len()).filter(|&s| open[s].1 == best));
        let s = match ties.len() {
            1 => ties[0],
            len => ties[rng.below(len)],
        };
        let list = &mut open[s].2;
        let nearest = list[0].0;
        let equal = list.iter().take_while(|c| c.0 == nearest).count();
        let pick = if equal > 1 { rng.below(equal) } else { 0 };
        chosen.push(list.remove(pick).1);
        open[s].1 += 1;
        if open[s].2.is_empty() {
            open.remove(s);
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}
