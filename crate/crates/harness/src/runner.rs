//! Seeded parallel execution of a plan and CSV emission.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use nsga3_core::dynamics::ViolationLog;
use nsga3_core::engine::{front_set, Engine, EngineConfig, Instrumentation, Stop};
use nsga3_core::objective::ObjectiveVector;
use nsga3_core::refpoints::ReferencePointSet;
use nsga3_core::rng::child_seed;

use crate::plan::{ExperimentPlan, RunConfig};
use crate::stats::{summarize, Summary};
use crate::{HarnessError, Result};

pub const CSV_HEADER: &str =
    "problem,n,d,k,mu,a,p,eps_nad,seed,generations,evaluations,covered,violations,wall_ms";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub problem: String,
    pub n: usize,
    pub d: usize,
    pub k: Option<usize>,
    pub mu: usize,
    pub a: u8,
    pub p: u32,
    pub eps_nad: f64,
    pub seed: u64,
    pub generations: u64,
    pub evaluations: u64,
    pub covered: bool,
    pub violations: usize,
    pub wall_ms: u64,
}

/// Overrides taken from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub master_seed: Option<u64>,
    pub workers: Option<usize>,
    pub budget: Option<u64>,
    pub instrument: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: usize,
    pub seed_index: u64,
    pub row: ResultRow,
    pub instrumentation: Instrumentation,
}

#[derive(Clone, Debug)]
pub struct PlanOutcome {
    pub configs: Vec<RunConfig>,
    /// Ordered by configuration, then seed index.
    pub records: Vec<RunRecord>,
}

/// Engine seed of run `seed_index` of configuration `config`.
pub fn run_seed(master: u64, config: usize, seed_index: u64) -> u64 {
    child_seed(child_seed(master, config as u64), seed_index)
}

type Shared = (
    Arc<ReferencePointSet>,
    Option<Arc<BTreeSet<ObjectiveVector>>>,
);

fn shared_inputs(configs: &[RunConfig]) -> Result<Vec<Shared>> {
    let mut refsets: BTreeMap<(u32, usize), Arc<ReferencePointSet>> = BTreeMap::new();
    let mut fronts: BTreeMap<String, Option<Arc<BTreeSet<ObjectiveVector>>>> = BTreeMap::new();
    configs
        .iter()
        .map(|c| {
            let key = (c.p, c.spec.d());
            let refset = match refsets.get(&key) {
                Some(r) => r.clone(),
                None => {
                    let r = Arc::new(ReferencePointSet::generate(c.p, c.spec.d())?);
                    refsets.insert(key, r.clone());
                    r
                }
            };
            let front = fronts
                .entry(c.spec.to_string())
                .or_insert_with(|| front_set(&c.spec))
                .clone();
            if front.is_none() {
                return Err(HarnessError::Plan(format!(
                    "the front of {} is too large to track coverage",
                    c.spec
                )));
            }
            Ok((refset, front))
        })
        .collect()
}

/// Runs one seed of one configuration to coverage or budget.
pub fn run_one(
    config: &RunConfig,
    seed: u64,
    shared: &Shared,
    instrument: bool,
) -> Result<(ResultRow, Instrumentation)> {
    let start = Instant::now();
    let mut cfg = EngineConfig::new(config.spec, config.mu, config.update, seed);
    cfg.p = config.p;
    cfg.p_override = config.p_override;
    cfg.eps_nad = config.eps_nad;
    cfg.max_generations = config.budget;
    cfg.instrument = instrument;
    let mut engine = Engine::with_shared(cfg, shared.0.clone(), shared.1.clone())?;
    let result = engine.run_until(Stop::FrontCovered {
        budget: config.budget,
    })?;
    let row = ResultRow {
        problem: config.spec.family().name().to_string(),
        n: config.spec.n(),
        d: config.spec.d(),
        k: config.spec.k(),
        mu: config.mu,
        a: config.update.flag(),
        p: config.p,
        eps_nad: config.eps_nad,
        seed,
        generations: result.generations,
        evaluations: result.evaluations,
        covered: result.covered,
        violations: result.instrumentation.violations.len(),
        wall_ms: start.elapsed().as_millis() as u64,
    };
    Ok((row, result.instrumentation))
}

/// Runs every (configuration, seed) pair of `plan`.
pub fn execute(plan: &ExperimentPlan, options: &RunOptions) -> Result<PlanOutcome> {
    let mut configs = plan.resolve()?;
    if let Some(b) = options.budget {
        for c in &mut configs {
            c.budget = b;
        }
    }
    let instrument = options.instrument.unwrap_or(plan.instrument);
    for c in &mut configs {
        c.instrument = instrument;
    }
    let master = options.master_seed.unwrap_or(plan.master_seed);
    let workers = options.workers.unwrap_or(plan.workers);
    if workers == 0 {
        return Err(HarnessError::Plan("workers must be at least 1".into()));
    }
    let shared = shared_inputs(&configs)?;
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| (0..plan.seeds).map(move |s| (c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let mut records = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, s)| {
                let seed = run_seed(master, c, s);
                let (row, instrumentation) = run_one(&configs[c], seed, &shared[c], instrument)?;
                Ok(RunRecord {
                    config: c,
                    seed_index: s,
                    row,
                    instrumentation,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|r| (r.config, r.seed_index));
    Ok(PlanOutcome { configs, records })
}

impl PlanOutcome {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.records.iter().map(|r| &r.row)
    }

    pub fn total_violations(&self) -> usize {
        self.records.iter().map(|r| r.row.violations).sum()
    }

    pub fn all_covered(&self) -> bool {
        self.records.iter().all(|r| r.row.covered)
    }

    /// Per-configuration summary of generation counts.
    pub fn summaries(&self) -> Vec<(RunConfig, Summary)> {
        self.configs
            .iter()
            .filter_map(|c| {
                let rows: Vec<&ResultRow> = self
                    .records
                    .iter()
                    .filter(|r| r.config == c.index)
                    .map(|r| &r.row)
                    .collect();
                let gens: Vec<u64> = rows.iter().map(|r| r.generations).collect();
                let covered: Vec<bool> = rows.iter().map(|r| r.covered).collect();
                summarize(&gens, &covered).map(|s| (c.clone(), s))
            })
            .collect()
    }

    /// All violations, tagged with the run seed.
    pub fn violation_log(&self) -> Vec<(u64, &ViolationLog)> {
        self.records
            .iter()
            .filter(|r| !r.instrumentation.violations.is_empty())
            .map(|r| (r.row.seed, &r.instrumentation.violations))
            .collect()
    }
}

/// Writes the header and one line per row.
pub fn write_rows<'a, W: Write>(
    rows: impl IntoIterator<Item = &'a ResultRow>,
    out: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the per-configuration summary as CSV.
pub fn write_summary<W: Write>(summaries: &[(RunConfig, Summary)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "problem",
        "n",
        "d",
        "k",
        "mu",
        "a",
        "runs",
        "median",
        "mean",
        "iqr",
        "coverage_rate",
    ])?;
    for (c, s) in summaries {
        w.write_record([
            c.spec.family().name().to_string(),
            c.spec.n().to_string(),
            c.spec.d().to_string(),
            c.spec.k().map(|k| k.to_string()).unwrap_or_default(),
            c.mu.to_string(),
            c.update.flag().to_string(),
            s.runs.to_string(),
            s.median.to_string(),
            format!("{:.1}", s.mean),
            s.iqr.to_string(),
            format!("{:.3}", s.coverage_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every violation as `seed,generation,lemma_id,witness,counts`.
pub fn write_violations<W: Write>(outcome: &PlanOutcome, mut out: W) -> Result<()> {
    writeln!(out, "seed,generation,lemma_id,witness,counts")?;
    for (seed, log) in outcome.violation_log() {
        let mut buf = Vec::new();
        log.write_csv(&mut buf)?;
        let text = String::from_utf8_lossy(&buf);
        for line in text.lines().skip(1) {
            writeln!(out, "{seed},{line}")?;
        }
    }
    Ok(())
}
