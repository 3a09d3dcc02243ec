//! The generation loop: offspring, optional stochastic population update,
//! non-dominated sorting, normalization and reference-point niching.

mod niching;
pub mod snapshot;

use std::collections::{BTreeSet, HashSet};

use rustc_hash::FxHashMap;
use std::fmt;
use std::sync::Arc;

use crate::benchmarks::{ProblemSpec, DEFAULT_FRONT_CAP};
use crate::bits::{standard_bit_mutation, BitString};
use crate::dynamics::{
    check_normalization, check_same_reference, check_transition, cover_numbers, sparsity_check,
    CoverMap, GenerationSnapshot, LemmaId, TransitionConfig, ViolationLog,
};
use crate::error::{Error, Result};
use crate::normalization::NormalizerState;
use crate::objective::{Individual, ObjectiveVector};
use crate::refpoints::{required_p, ReferencePointSet};
use crate::rng::{child_seed, RandomSource};
use crate::sorting::{first_layer, non_dominated_sort};

/// Whether part of the merged population bypasses selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PopulationUpdate {
    /// `a = 0`: all `2μ` individuals compete for `μ` places.
    #[default]
    Deterministic,
    /// `a = 1`: `⌈3μ/2⌉` random individuals compete for `⌈μ/2⌉` places and
    /// the other `⌊μ/2⌋` survive unconditionally.
    Stochastic,
}

impl PopulationUpdate {
    pub fn from_flag(a: u8) -> Result<Self> {
        match a {
            0 => Ok(Self::Deterministic),
            1 => Ok(Self::Stochastic),
            _ => Err(Error::Specification(format!(
                "update flag a = {a} must be 0 or 1"
            ))),
        }
    }

    pub fn flag(self) -> u8 {
        match self {
            Self::Deterministic => 0,
            Self::Stochastic => 1,
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == Self::Stochastic
    }

    /// Number of survivors chosen by selection.
    pub fn target(self, mu: usize) -> usize {
        match self {
            Self::Deterministic => mu,
            Self::Stochastic => mu.div_ceil(2),
        }
    }

    /// Splits `0..2μ` into the selection pool (`⌈3μ/2⌉` indices) and the
    /// leftover (`⌊μ/2⌋` indices), both ascending.
    pub fn subsample(
        self,
        merged: usize,
        rng: &mut RandomSource,
    ) -> Result<(Vec<usize>, Vec<usize>)> {
        if !self.is_stochastic() {
            return Err(Error::Misuse(
                "subsampling requires the stochastic update".into(),
            ));
        }
        if merged % 2 != 0 || merged == 0 {
            return Err(Error::Misuse(format!(
                "merged population of size {merged} is not 2μ"
            )));
        }
        let mu = merged / 2;
        Ok(rng.split_without_replacement(merged, (3 * mu).div_ceil(2)))
    }
}

/// How the critical layer is cut when it does not fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SurvivalRule {
    #[default]
    Niching,
    /// Keeps the lowest indices of the critical layer. Only for checker
    /// self-tests: it loses first-layer vectors.
    FirstCome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub spec: ProblemSpec,
    pub mu: usize,
    pub update: PopulationUpdate,
    pub p: u32,
    pub eps_nad: f64,
    pub seed: u64,
    /// Budget used by [`Engine::run`].
    pub max_generations: u64,
    /// Run the lemma checkers every generation.
    pub instrument: bool,
    /// Accept `p < required_p`.
    pub p_override: bool,
    /// Keep one [`GenerationReport`] per generation in the run result.
    pub keep_reports: bool,
    pub survival: SurvivalRule,
}

impl EngineConfig {
    /// `p = required_p`, `eps_nad = f_max`, no instrumentation, unbounded
    /// budget.
    pub fn new(spec: ProblemSpec, mu: usize, update: PopulationUpdate, seed: u64) -> Self {
        Self {
            spec,
            mu,
            update,
            p: required_p(&spec),
            eps_nad: f64::from(spec.f_max()),
            seed,
            max_generations: u64::MAX,
            instrument: false,
            p_override: false,
            keep_reports: false,
            survival: SurvivalRule::Niching,
        }
    }

    /// Checks hard constraints and returns warnings for soft ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        let spec_err = |msg: String| Err(Error::Specification(msg));
        if self.mu == 0 {
            return spec_err("mu must be positive".into());
        }
        if self.p == 0 {
            return spec_err("p must be positive".into());
        }
        if !self.eps_nad.is_finite() || self.eps_nad < 0.0 {
            return spec_err(format!(
                "eps_nad = {} must be finite and non-negative",
                self.eps_nad
            ));
        }
        let mut warnings = Vec::new();
        let required = required_p(&self.spec);
        if self.p < required {
            if !self.p_override {
                return spec_err(format!(
                    "p = {} is below required_p = {required}; set the override to allow it",
                    self.p
                ));
            }
            warnings.push(format!("p = {} overrides required_p = {required}", self.p));
        }
        let need = (1 + self.update.flag() as usize).saturating_mul(self.spec.s_upper());
        if self.mu < need {
            warnings.push(format!(
                "mu = {} is below (1+a)|S_d| bound {need}; protection is not guaranteed",
                self.mu
            ));
        }
        if self.eps_nad < f64::from(self.spec.f_max()) {
            warnings.push(format!(
                "eps_nad = {} is below f_max = {}",
                self.eps_nad,
                self.spec.f_max()
            ));
        }
        Ok(warnings)
    }

    /// Whether the transition checks (L6, L7) are guaranteed to pass.
    pub fn transition_checks_apply(&self) -> bool {
        self.lemma5_applies()
            && self.mu >= (1 + self.update.flag() as usize).saturating_mul(self.spec.s_upper())
    }

    /// Whether L5 is guaranteed to pass.
    pub fn lemma5_applies(&self) -> bool {
        self.lemma1_applies() && self.p >= required_p(&self.spec)
    }

    /// Whether L1 is guaranteed to pass.
    pub fn lemma1_applies(&self) -> bool {
        self.eps_nad >= f64::from(self.spec.f_max())
    }
}

/// Everything that evolves during a run.
#[derive(Clone, Debug)]
pub struct EngineState {
    pub population: Vec<Individual>,
    pub generation: u64,
    pub rng: RandomSource,
    pub normalizer: NormalizerState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationReport {
    /// Index of the population produced by this step.
    pub generation: u64,
    /// Individuals in the first layer of the selection pool.
    pub first_layer_size: usize,
    pub distinct_fitness: usize,
    /// Share of front vectors present in the population, when the front is
    /// known.
    pub coverage: Option<f64>,
    pub max_cover: usize,
    /// Lemmas violated in this step.
    pub violations: Vec<LemmaId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// Until every front vector is in the population or `budget`
    /// generations have run.
    FrontCovered { budget: u64 },
    /// Exactly this many more generations.
    Generations(u64),
}

/// Counters collected while instrumentation is on.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Instrumentation {
    pub violations: ViolationLog,
    /// Generations whose normalization was checked.
    pub lemma1_checks: u64,
    /// First-layer pairs examined for L5.
    pub lemma5_pairs: u64,
    pub transitions_checked: u64,
    /// Checked transitions that started from an all-Pareto population under
    /// the deterministic update, where L7-3 applies.
    pub pareto_transitions: u64,
    /// First generation whose population was all Pareto optimal with an
    /// even spread over its own vectors (a = 0).
    pub first_sparse_generation: Option<u64>,
    /// Generations in which a strictly dominated individual survived.
    pub dominated_survivor_generations: u64,
    /// Stochastic update: one pool position per generation, fixed by a hash
    /// of seed and generation, and how often it landed in the leftover.
    pub bypass_samples: u64,
    pub bypass_hits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub generations: u64,
    pub evaluations: u64,
    pub covered: bool,
    pub reports: Vec<GenerationReport>,
    pub instrumentation: Instrumentation,
}

/// Smallest `i` with `sizes[0] + … + sizes[i] ≥ target`, and the number of
/// individuals in the layers before it.
pub fn critical_rank(sizes: &[usize], target: usize) -> Result<(usize, usize)> {
    let mut below = 0;
    for (i, &s) in sizes.iter().enumerate() {
        if below + s >= target {
            return Ok((i, below));
        }
        below += s;
    }
    Err(Error::Misuse(format!(
        "layers hold {below} individuals, fewer than the target {target}"
    )))
}

pub struct Engine {
    config: EngineConfig,
    refset: Arc<ReferencePointSet>,
    front: Option<Arc<BTreeSet<ObjectiveVector>>>,
    state: EngineState,
    warnings: Vec<String>,
    instr: Instrumentation,
    /// Cover and Pareto status of the current population, for the next
    /// transition check.
    pending: Option<GenerationSnapshot>,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("config", &self.config)
            .field("generation", &self.state.generation)
            .finish_non_exhaustive()
    }
}

/// The front as a set, or `None` when it is too large to enumerate.
pub fn front_set(spec: &ProblemSpec) -> Option<Arc<BTreeSet<ObjectiveVector>>> {
    if spec.front_size() > DEFAULT_FRONT_CAP {
        return None;
    }
    spec.enumerate_front()
        .ok()
        .map(|f| Arc::new(f.into_iter().collect()))
}

impl Engine {
    /// Builds the reference set and front, then a uniformly random population.
    pub fn new(config: EngineConfig) -> Result<Self> {
        let refset = Arc::new(ReferencePointSet::generate(config.p, config.spec.d())?);
        let front = front_set(&config.spec);
        Self::with_shared(config, refset, front)
    }

    /// Like [`new`](Self::new) with a reference set and front shared between
    /// runs.
    pub fn with_shared(
        config: EngineConfig,
        refset: Arc<ReferencePointSet>,
        front: Option<Arc<BTreeSet<ObjectiveVector>>>,
    ) -> Result<Self> {
        let mut rng = RandomSource::new(config.seed);
        let n = config.spec.n();
        let genotypes: Vec<BitString> = (0..config.mu)
            .map(|_| BitString::random(n, &mut rng))
            .collect();
        Self::assemble(config, refset, front, genotypes, rng, 0)
    }

    /// Starts from the given genotypes instead of a random population.
    pub fn from_population(
        config: EngineConfig,
        refset: Arc<ReferencePointSet>,
        front: Option<Arc<BTreeSet<ObjectiveVector>>>,
        genotypes: Vec<BitString>,
    ) -> Result<Self> {
        let rng = RandomSource::new(config.seed);
        Self::assemble(config, refset, front, genotypes, rng, 0)
    }

    fn assemble(
        config: EngineConfig,
        refset: Arc<ReferencePointSet>,
        front: Option<Arc<BTreeSet<ObjectiveVector>>>,
        genotypes: Vec<BitString>,
        rng: RandomSource,
        generation: u64,
    ) -> Result<Self> {
        let warnings = config.validate()?;
        if refset.p() != config.p || refset.d() != config.spec.d() {
            return Err(Error::Specification(format!(
                "reference set (p={}, d={}) does not match the configuration (p={}, d={})",
                refset.p(),
                refset.d(),
                config.p,
                config.spec.d()
            )));
        }
        if genotypes.len() != config.mu {
            return Err(Error::DimensionMismatch {
                expected: config.mu,
                actual: genotypes.len(),
            });
        }
        let population = genotypes
            .into_iter()
            .map(|x| {
                let fitness = config.spec.evaluate(&x)?;
                Ok(Individual::new(x, fitness))
            })
            .collect::<Result<Vec<_>>>()?;
        let normalizer = NormalizerState::new(config.spec.d(), config.eps_nad);
        let mut engine = Self {
            config,
            refset,
            front,
            state: EngineState {
                population,
                generation,
                rng,
                normalizer,
            },
            warnings,
            instr: Instrumentation::default(),
            pending: None,
        };
        if engine.config.instrument {
            let cover = cover_numbers(&engine.state.population);
            engine.pending = Some(engine.snapshot_of(cover));
        }
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn population(&self) -> &[Individual] {
        &self.state.population
    }

    pub fn generation(&self) -> u64 {
        self.state.generation
    }

    pub fn refset(&self) -> &Arc<ReferencePointSet> {
        &self.refset
    }

    pub fn front(&self) -> Option<&Arc<BTreeSet<ObjectiveVector>>> {
        self.front.as_ref()
    }

    /// Soft precondition failures found at construction.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn instrumentation(&self) -> &Instrumentation {
        &self.instr
    }

    pub fn cover(&self) -> CoverMap {
        cover_numbers(&self.state.population)
    }

    /// Whether every front vector has a carrier. `None` if the front is
    /// unknown.
    pub fn front_covered(&self) -> Option<bool> {
        let front = self.front.as_ref()?;
        let present: HashSet<&ObjectiveVector> =
            self.state.population.iter().map(|x| &x.fitness).collect();
        Some(front.iter().all(|v| present.contains(v)))
    }

    fn snapshot_of(&self, cover: CoverMap) -> GenerationSnapshot {
        let all_pareto = cover.keys().all(|v| self.config.spec.is_front_vector(v));
        GenerationSnapshot {
            generation: self.state.generation,
            cover,
            merged_first_layer: BTreeSet::new(),
            all_pareto,
        }
    }

    /// One generation.
    pub fn step(&mut self) -> Result<GenerationReport> {
        let mu = self.config.mu;
        let spec = self.config.spec;
        let t = self.state.generation;
        let rng = &mut self.state.rng;

        let mut offspring = Vec::with_capacity(mu);
        for _ in 0..mu {
            let parent = &self.state.population[rng.below(mu)].genotype;
            let child = standard_bit_mutation(parent, rng);
            let fitness = spec.evaluate(&child)?;
            offspring.push(Individual::new(child, fitness));
        }
        let mut merged = std::mem::take(&mut self.state.population);
        merged.extend(offspring);

        let (pool, leftover) = match self.config.update {
            PopulationUpdate::Deterministic => ((0..merged.len()).collect(), Vec::new()),
            PopulationUpdate::Stochastic => self.config.update.subsample(merged.len(), rng)?,
        };
        let target = self.config.update.target(mu);
        let fitness: Vec<&ObjectiveVector> = pool.iter().map(|&i| &merged[i].fitness).collect();
        let layers = non_dominated_sort(&fitness)?;
        let sizes: Vec<usize> = layers.iter().map(Vec::len).collect();
        let (istar, below) = critical_rank(&sizes, target)?;
        let mut survivors: Vec<usize> = layers[..istar].iter().flatten().copied().collect();
        survivors.sort_unstable();
        let critical = &layers[istar];
        let norm_pool: Vec<usize> = survivors.iter().chain(critical).copied().collect();
        let map = self
            .state
            .normalizer
            .normalize_generation(&fitness, &layers, &norm_pool)?;

        let slots = target - below;
        let chosen = if slots == critical.len() {
            critical.clone()
        } else {
            match self.config.survival {
                SurvivalRule::Niching => niching::select(
                    &fitness,
                    &survivors,
                    critical,
                    slots,
                    &map,
                    &self.refset,
                    rng,
                )?,
                SurvivalRule::FirstCome => critical[..slots].to_vec(),
            }
        };

        let mut report_violations = Vec::new();
        let mut merged_first: BTreeSet<ObjectiveVector> = BTreeSet::new();
        if self.config.instrument {
            let before = self.instr.violations.len();
            if self.config.lemma1_applies() {
                self.instr
                    .violations
                    .extend(check_normalization(t, &map, &fitness, spec.f_max()));
                self.instr.lemma1_checks += 1;
            }
            if self.config.lemma5_applies() {
                let first = &layers[0];
                let niches =
                    niching::associate_all(&fitness, first.iter().copied(), &map, &self.refset)?;
                let vs: Vec<&ObjectiveVector> = first.iter().map(|&i| fitness[i]).collect();
                let refs: Vec<usize> = first
                    .iter()
                    .map(|&i| niches[i].expect("associated").reference)
                    .collect();
                let (found, pairs) = check_same_reference(t, &vs, &refs);
                self.instr.violations.extend(found);
                self.instr.lemma5_pairs += pairs;
            }
            let full_first = if leftover.is_empty() {
                layers[0].iter().map(|&i| fitness[i].clone()).collect()
            } else {
                first_layer(&merged)?
                    .into_iter()
                    .map(|i| merged[i].fitness.clone())
                    .collect()
            };
            merged_first = full_first;
            for lemma in self.instr.violations.entries()[before..]
                .iter()
                .map(|v| v.lemma)
            {
                if !report_violations.contains(&lemma) {
                    report_violations.push(lemma);
                }
            }
        }
        if self.config.update.is_stochastic() {
            let probe = (child_seed(self.config.seed, t) % merged.len() as u64) as usize;
            self.instr.bypass_samples += 1;
            if leftover.binary_search(&probe).is_ok() {
                self.instr.bypass_hits += 1;
            }
        }

        let first_layer_size = layers[0].len();
        let mut keep: Vec<usize> = survivors.iter().chain(&chosen).map(|&i| pool[i]).collect();
        keep.sort_unstable();
        keep.extend(leftover);
        let mut slots_taken: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
        let next: Vec<Individual> = keep
            .iter()
            .map(|&i| slots_taken[i].take().expect("each index kept once"))
            .collect();
        debug_assert_eq!(next.len(), mu);
        self.state.population = next;
        self.state.generation += 1;

        let mut counts: FxHashMap<&ObjectiveVector, usize> = FxHashMap::default();
        for x in &self.state.population {
            *counts.entry(&x.fitness).or_insert(0) += 1;
        }
        let report_max_cover = counts.values().copied().max().unwrap_or(0);
        let distinct_fitness = counts.len();
        let coverage = self.front.as_ref().map(|front| {
            let hit = front.iter().filter(|v| counts.contains_key(*v)).count();
            hit as f64 / front.len().max(1) as f64
        });
        drop(counts);

        if self.config.instrument {
            let cover = cover_numbers(&self.state.population);
            if cover.keys().any(|v| !merged_first.contains(v)) {
                self.instr.dominated_survivor_generations += 1;
            }
            let next_snap = self.snapshot_of(cover);
            if let Some(mut prev) = self.pending.take() {
                prev.merged_first_layer = std::mem::take(&mut merged_first);
                if self.config.transition_checks_apply() {
                    let cfg = TransitionConfig {
                        mu,
                        stochastic: self.config.update.is_stochastic(),
                        s_upper: spec.s_upper(),
                    };
                    let found = check_transition(&prev, &next_snap, &cfg);
                    for v in &found {
                        if !report_violations.contains(&v.lemma) {
                            report_violations.push(v.lemma);
                        }
                    }
                    self.instr.violations.extend(found);
                    self.instr.transitions_checked += 1;
                    if prev.all_pareto && !cfg.stochastic {
                        self.instr.pareto_transitions += 1;
                    }
                }
            }
            if self.instr.first_sparse_generation.is_none()
                && !self.config.update.is_stochastic()
                && next_snap.all_pareto
            {
                let v_set: Vec<ObjectiveVector> = next_snap.cover.keys().cloned().collect();
                if sparsity_check(&next_snap.cover, mu, &v_set) {
                    self.instr.first_sparse_generation = Some(self.state.generation);
                }
            }
            self.pending = Some(next_snap);
        }

        Ok(GenerationReport {
            generation: self.state.generation,
            first_layer_size,
            distinct_fitness,
            coverage,
            max_cover: report_max_cover,
            violations: report_violations,
        })
    }

    /// Steps until `stop` is met. Budget exhaustion is a normal result with
    /// `covered = false`.
    pub fn run_until(&mut self, stop: Stop) -> Result<RunResult> {
        let start = self.state.generation;
        let mut reports = Vec::new();
        let mut covered = match stop {
            Stop::FrontCovered { .. } => self.front_covered().ok_or_else(|| {
                Error::Misuse(format!(
                    "the front of {} is too large to track",
                    self.config.spec
                ))
            })?,
            Stop::Generations(_) => self.front_covered().unwrap_or(false),
        };
        loop {
            let done = self.state.generation - start;
            match stop {
                Stop::FrontCovered { budget } if covered || done >= budget => break,
                Stop::Generations(g) if done >= g => break,
                _ => {}
            }
            let report = self.step()?;
            covered = report.coverage == Some(1.0);
            if self.config.keep_reports {
                reports.push(report);
            }
        }
        let generations = self.state.generation;
        Ok(RunResult {
            generations,
            evaluations: self.config.mu as u64 * (generations + 1),
            covered,
            reports,
            instrumentation: self.instr.clone(),
        })
    }

    /// [`run_until`](Self::run_until) with the configured budget.
    pub fn run(&mut self) -> Result<RunResult> {
        self.run_until(Stop::FrontCovered {
            budget: self.config.max_generations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_rank_examples() {
        assert_eq!(critical_rank(&[3, 3], 4).unwrap(), (1, 3));
        assert_eq!(critical_rank(&[5, 2], 5).unwrap(), (0, 0));
        assert_eq!(critical_rank(&[2, 2, 9], 4).unwrap(), (1, 2));
        assert!(critical_rank(&[1, 1], 3).is_err());
    }

    #[test]
    fn subsample_sizes() {
        let mut rng = RandomSource::new(1);
        let (pool, rest) = PopulationUpdate::Stochastic.subsample(8, &mut rng).unwrap();
        assert_eq!((pool.len(), rest.len()), (6, 2));
        let (pool, rest) = PopulationUpdate::Stochastic
            .subsample(10, &mut rng)
            .unwrap();
        assert_eq!((pool.len(), rest.len()), (8, 2));
        assert!(matches!(
            PopulationUpdate::Deterministic.subsample(8, &mut rng),
            Err(Error::Misuse(_))
        ));
    }

    #[test]
    fn targets() {
        assert_eq!(PopulationUpdate::Deterministic.target(5), 5);
        assert_eq!(PopulationUpdate::Stochastic.target(5), 3);
        assert_eq!(PopulationUpdate::Stochastic.target(4), 2);
    }

    #[test]
    fn rejects_small_p_without_override() {
        let spec = ProblemSpec::omm(10, 2).unwrap();
        let mut cfg = EngineConfig::new(spec, 11, PopulationUpdate::Deterministic, 0);
        cfg.p = 3;
        assert!(matches!(cfg.validate(), Err(Error::Specification(_))));
        cfg.p_override = true;
        assert_eq!(cfg.validate().unwrap().len(), 1);
    }

    #[test]
    fn population_size_is_kept() {
        let spec = ProblemSpec::lotz(12, 2).unwrap();
        for update in [
            PopulationUpdate::Deterministic,
            PopulationUpdate::Stochastic,
        ] {
            for mu in [1, 5, 13, 26] {
                let cfg = EngineConfig::new(spec, mu, update, 9);
                let mut engine = Engine::new(cfg).unwrap();
                for _ in 0..20 {
                    engine.step().unwrap();
                    assert_eq!(engine.population().len(), mu);
                }
            }
        }
    }
}
