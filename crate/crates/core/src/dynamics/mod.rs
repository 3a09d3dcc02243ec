//! Cover numbers and runtime checks of the structural population invariants.
//!
//! The hard checks (L1, L5, L6, L7-1, L7-2, L7-3) hold deterministically once
//! their preconditions are met: `eps_nad ≥ f_max`, `p ≥ 2 d^{3/2} f_max` and,
//! for the transition checks, `μ ≥ (1 + a) |S_d|`. L9-2 (even spread on the
//! front) is only a with-high-probability statement and is monitored, never
//! logged as a violation.

mod antichain;
pub mod oracles;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Write};

use crate::normalization::NormalizedMap;
use crate::objective::ObjectiveVector;

pub use antichain::{max_antichain_oracle, ANTICHAIN_CAP};

/// Fitness vector → number of carriers.
pub type CoverMap = BTreeMap<ObjectiveVector, usize>;

pub fn cover_numbers<V: Borrow<ObjectiveVector>>(population: &[V]) -> CoverMap {
    let mut map = CoverMap::new();
    for v in population {
        *map.entry(v.borrow().clone()).or_insert(0) += 1;
    }
    map
}

pub fn max_cover(cover: &CoverMap) -> usize {
    cover.values().copied().max().unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    /// Normalized values in `[0, 1]`, `y_nad - y_min ≤ f_max`.
    L1,
    /// Distinct first-layer fitness ⇔ distinct reference point.
    L5,
    /// Every merged first-layer vector keeps a carrier.
    L6,
    /// Cover numbers up to `⌊μ/((1+a)|S_d|)⌋` never drop.
    L7_1,
    /// After a drop of `c(v)`, no cover exceeds the old `c(v)` (a = 0).
    L7_2,
    /// Maximum cover does not grow while the population is Pareto optimal
    /// (a = 0).
    L7_3,
    /// Even spread over a covered front subset (advisory).
    L9_2,
}

impl LemmaId {
    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::L1 => "L1",
            LemmaId::L5 => "L5",
            LemmaId::L6 => "L6",
            LemmaId::L7_1 => "L7-1",
            LemmaId::L7_2 => "L7-2",
            LemmaId::L7_3 => "L7-3",
            LemmaId::L9_2 => "L9-2",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub generation: u64,
    pub lemma: LemmaId,
    pub witness: Option<ObjectiveVector>,
    /// Counts or values that break the invariant, e.g. `2->1`.
    pub counts: String,
}

impl Violation {
    fn new(generation: u64, lemma: LemmaId, witness: &ObjectiveVector, counts: String) -> Self {
        Self {
            generation,
            lemma,
            witness: Some(witness.clone()),
            counts,
        }
    }
}

/// `3;2` rendering of a vector, safe inside a CSV field.
pub fn semicolons(v: &ObjectiveVector) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Append-only record of violations of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViolationLog {
    entries: Vec<Violation>,
}

impl ViolationLog {
    pub fn push(&mut self, v: Violation) {
        self.entries.push(v);
    }

    pub fn extend(&mut self, vs: impl IntoIterator<Item = Violation>) {
        self.entries.extend(vs);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Violation] {
        &self.entries
    }

    pub fn count(&self, lemma: LemmaId) -> usize {
        self.entries.iter().filter(|v| v.lemma == lemma).count()
    }

    /// CSV with header `generation,lemma_id,witness,counts`; the witness is
    /// written with `;` between coordinates.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "generation,lemma_id,witness,counts")?;
        for v in &self.entries {
            let witness = v.witness.as_ref().map(semicolons).unwrap_or_default();
            writeln!(out, "{},{},{},{}", v.generation, v.lemma, witness, v.counts)?;
        }
        Ok(())
    }
}

/// What the transition checks need to know about generation `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationSnapshot {
    pub generation: u64,
    pub cover: CoverMap,
    /// Distinct fitness vectors of the first layer of `P_t ∪ Q_t`. Empty for
    /// the newest generation, whose offspring do not exist yet.
    pub merged_first_layer: BTreeSet<ObjectiveVector>,
    /// Whether every member of `P_t` is Pareto optimal.
    pub all_pareto: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransitionConfig {
    pub mu: usize,
    pub stochastic: bool,
    /// Upper bound on `|S_d|` used for the cover threshold.
    pub s_upper: usize,
}

impl TransitionConfig {
    /// `⌊μ / ((1+a) |S_d|)⌋`.
    pub fn cover_threshold(&self) -> usize {
        let factor = if self.stochastic { 2 } else { 1 };
        self.mu / (factor * self.s_upper.max(1))
    }
}

/// L6, L7-1, L7-2 and L7-3 for the step from `prev` to `next`.
///
/// A vector counts as non-dominated at `t` when it is in the first layer of
/// `P_t ∪ Q_t`. That is all the cover arguments use: such a vector's carriers
/// sit in the first layer of the selection pool or bypass selection.
pub fn check_transition(
    prev: &GenerationSnapshot,
    next: &GenerationSnapshot,
    config: &TransitionConfig,
) -> Vec<Violation> {
    let t = prev.generation;
    let mut out = Vec::new();
    let after = |v: &ObjectiveVector| next.cover.get(v).copied().unwrap_or(0);
    let b_max = config.cover_threshold();

    for v in &prev.merged_first_layer {
        let c_next = after(v);
        if c_next == 0 {
            out.push(Violation::new(
                t,
                LemmaId::L6,
                v,
                format!("{}->0", prev.cover.get(v).copied().unwrap_or(0)),
            ));
        }
        let c_prev = prev.cover.get(v).copied().unwrap_or(0);
        let b = c_prev.min(b_max);
        if c_next < b {
            out.push(Violation::new(
                t,
                LemmaId::L7_1,
                v,
                format!("{c_prev}->{c_next} (b={b})"),
            ));
        }
        if !config.stochastic && c_next < c_prev {
            for (w, &cw) in &next.cover {
                if cw > c_prev {
                    out.push(Violation::new(
                        t,
                        LemmaId::L7_2,
                        w,
                        format!(
                            "{cw}>{c_prev} after {} dropped {c_prev}->{c_next}",
                            semicolons(v)
                        ),
                    ));
                }
            }
        }
    }
    if !config.stochastic && prev.all_pareto {
        let (m_prev, m_next) = (max_cover(&prev.cover), max_cover(&next.cover));
        if m_next > m_prev {
            let w = next
                .cover
                .iter()
                .find(|(_, &c)| c == m_next)
                .map(|(w, _)| w)
                .unwrap();
            out.push(Violation::new(
                t,
                LemmaId::L7_3,
                w,
                format!("{m_prev}->{m_next}"),
            ));
        }
    }
    out
}

/// L1 for one generation: every normalized component of every member of the
/// selection pool lies in `[0, 1]`, and `y_nad_j - y_min_j ≤ f_max`.
pub fn check_normalization<V: Borrow<ObjectiveVector>>(
    generation: u64,
    map: &NormalizedMap,
    merged: &[V],
    f_max: u32,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (j, (&nad, &min)) in map.y_nad.iter().zip(&map.y_min).enumerate() {
        if nad - min > f64::from(f_max) {
            out.push(Violation {
                generation,
                lemma: LemmaId::L1,
                witness: None,
                counts: format!("y_nad-y_min={} > {f_max} in objective {}", nad - min, j + 1),
            });
        }
    }
    let mut buf = Vec::new();
    let mut seen = BTreeSet::new();
    for v in merged {
        let v = v.borrow();
        if !seen.insert(v) {
            continue;
        }
        map.apply_into(v, &mut buf);
        if let Some((j, x)) = buf
            .iter()
            .enumerate()
            .find(|(_, x)| !(0.0..=1.0).contains(*x))
        {
            out.push(Violation::new(
                generation,
                LemmaId::L1,
                v,
                format!("f^n_{}={x}", j + 1),
            ));
        }
    }
    out
}

/// L5 for one generation. `refs[i]` is the reference point associated with
/// `first_layer[i]`. Returns the violations and the number of pairs covered.
pub fn check_same_reference(
    generation: u64,
    first_layer: &[&ObjectiveVector],
    refs: &[usize],
) -> (Vec<Violation>, u64) {
    let mut out = Vec::new();
    let mut by_fitness: HashMap<&ObjectiveVector, usize> = HashMap::new();
    let mut by_ref: HashMap<usize, &ObjectiveVector> = HashMap::new();
    for (&v, &r) in first_layer.iter().zip(refs) {
        match by_fitness.get(v) {
            Some(&r0) if r0 != r => out.push(Violation::new(
                generation,
                LemmaId::L5,
                v,
                format!("refs {r0}!={r}"),
            )),
            Some(_) => {}
            None => {
                by_fitness.insert(v, r);
            }
        }
        match by_ref.get(&r) {
            Some(&w) if w != v => out.push(Violation::new(
                generation,
                LemmaId::L5,
                v,
                format!("shares ref {r} with {}", semicolons(w)),
            )),
            Some(_) => {}
            None => {
                by_ref.insert(r, v);
            }
        }
    }
    let m = first_layer.len() as u64;
    (out, m * m.saturating_sub(1) / 2)
}

/// Even-spread monitor: every `v ∈ V` has cover at most `⌈μ/|V|⌉`.
pub fn sparsity_check(cover: &CoverMap, mu: usize, v_set: &[ObjectiveVector]) -> bool {
    if v_set.is_empty() {
        return true;
    }
    let cap = mu.div_ceil(v_set.len());
    v_set
        .iter()
        .all(|v| cover.get(v).copied().unwrap_or(0) <= cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: &[u32]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec())
    }

    fn snap(
        generation: u64,
        pop: &[&[u32]],
        first: &[&[u32]],
        all_pareto: bool,
    ) -> GenerationSnapshot {
        let pop: Vec<ObjectiveVector> = pop.iter().map(|v| ov(v)).collect();
        GenerationSnapshot {
            generation,
            cover: cover_numbers(&pop),
            merged_first_layer: first.iter().map(|v| ov(v)).collect(),
            all_pareto,
        }
    }

    const CFG: TransitionConfig = TransitionConfig {
        mu: 4,
        stochastic: false,
        s_upper: 2,
    };

    #[test]
    fn cover_examples() {
        let c = cover_numbers(&vec![ov(&[1, 2]); 5]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[&ov(&[1, 2])], 5);
        let c = cover_numbers(&[ov(&[1, 2]), ov(&[1, 2]), ov(&[2, 1])]);
        assert_eq!(c[&ov(&[1, 2])], 2);
        assert_eq!(c[&ov(&[2, 1])], 1);
        assert_eq!(c.values().sum::<usize>(), 3);
    }

    #[test]
    fn clone_transition_is_clean() {
        let s = snap(
            3,
            &[&[2, 0], &[2, 0], &[0, 2], &[1, 1]],
            &[&[2, 0], &[0, 2], &[1, 1]],
            true,
        );
        assert!(check_transition(&s, &s, &CFG).is_empty());
    }

    #[test]
    fn dropped_vector_is_l6() {
        let prev = snap(
            0,
            &[&[2, 0], &[0, 2], &[1, 1], &[1, 1]],
            &[&[2, 0], &[0, 2], &[1, 1]],
            false,
        );
        let next = snap(1, &[&[2, 0], &[0, 2], &[0, 2], &[0, 2]], &[], false);
        let v = check_transition(&prev, &next, &CFG);
        assert_eq!(v.iter().filter(|x| x.lemma == LemmaId::L6).count(), 1);
        assert_eq!(
            v.iter().find(|x| x.lemma == LemmaId::L6).unwrap().witness,
            Some(ov(&[1, 1]))
        );
    }

    #[test]
    fn cover_drop_below_threshold_is_l7_1() {
        // threshold ⌊4 / 2⌋ = 2, c(2,0) falls from 2 to 1
        let prev = snap(
            0,
            &[&[2, 0], &[2, 0], &[0, 2], &[0, 2]],
            &[&[2, 0], &[0, 2]],
            false,
        );
        let next = snap(1, &[&[2, 0], &[0, 2], &[0, 2], &[0, 2]], &[], false);
        let v = check_transition(&prev, &next, &CFG);
        assert!(v
            .iter()
            .any(|x| x.lemma == LemmaId::L7_1 && x.witness == Some(ov(&[2, 0]))));
        // (0,2) now has 3 > 2 carriers after (2,0) dropped from 2
        assert!(v
            .iter()
            .any(|x| x.lemma == LemmaId::L7_2 && x.witness == Some(ov(&[0, 2]))));
    }

    #[test]
    fn max_cover_growth_is_l7_3() {
        let cfg = TransitionConfig {
            mu: 4,
            stochastic: false,
            s_upper: 4,
        };
        let prev = snap(
            0,
            &[&[2, 0], &[2, 0], &[0, 2], &[1, 1]],
            &[&[2, 0], &[0, 2], &[1, 1]],
            true,
        );
        let next = snap(1, &[&[2, 0], &[0, 2], &[0, 2], &[0, 2]], &[], false);
        let v = check_transition(&prev, &next, &cfg);
        assert!(v.iter().any(|x| x.lemma == LemmaId::L7_3));
        let mut quiet = prev.clone();
        quiet.all_pareto = false;
        assert!(!check_transition(&quiet, &next, &cfg)
            .iter()
            .any(|x| x.lemma == LemmaId::L7_3));
    }

    #[test]
    fn stochastic_mode_skips_a0_checks() {
        let cfg = TransitionConfig {
            mu: 4,
            stochastic: true,
            s_upper: 4,
        };
        let prev = snap(
            0,
            &[&[2, 0], &[2, 0], &[0, 2], &[1, 1]],
            &[&[2, 0], &[0, 2], &[1, 1]],
            true,
        );
        let next = snap(1, &[&[2, 0], &[0, 2], &[0, 2], &[1, 1]], &[], false);
        assert!(check_transition(&prev, &next, &cfg).is_empty());
    }

    #[test]
    fn normalization_check() {
        let map = NormalizedMap {
            y_min: vec![0.0, 0.0],
            y_nad: vec![4.0, 4.0],
            degenerate: vec![false, false],
            used_intercepts: true,
        };
        assert!(check_normalization(0, &map, &[ov(&[4, 0]), ov(&[2, 2])], 4).is_empty());
        let v = check_normalization(0, &map, &[ov(&[5, 0])], 5);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].lemma, LemmaId::L1);
        assert_eq!(check_normalization(0, &map, &[ov(&[1, 0])], 3).len(), 2);
    }

    #[test]
    fn same_reference_check() {
        let (a, b) = (ov(&[2, 0]), ov(&[0, 2]));
        let (v, pairs) = check_same_reference(0, &[&a, &a, &b], &[5, 5, 7]);
        assert!(v.is_empty());
        assert_eq!(pairs, 3);
        let (v, _) = check_same_reference(0, &[&a, &b], &[5, 5]);
        assert_eq!(v.len(), 1);
        let (v, _) = check_same_reference(0, &[&a, &a], &[5, 6]);
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn sparsity_examples() {
        let front: Vec<_> = (0..4).map(|i| ov(&[i, 3 - i])).collect();
        assert!(sparsity_check(&cover_numbers(&front), 4, &front));
        let mut pop = front.clone();
        pop.extend([ov(&[0, 3]), ov(&[0, 3]), ov(&[1, 2]), ov(&[2, 1])]);
        assert!(!sparsity_check(&cover_numbers(&pop), 8, &front));
    }

    #[test]
    fn csv_format() {
        let mut log = ViolationLog::default();
        log.push(Violation::new(
            7,
            LemmaId::L7_1,
            &ov(&[3, 2]),
            "2->1".into(),
        ));
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "generation,lemma_id,witness,counts\n7,L7-1,3;2,2->1\n"
        );
    }
}
