//! The acceptance battery: one check per criterion, each returning a report
//! line. Criteria that replay an experiment load the shipped presets.

use std::fmt;

use rayon::prelude::*;

use nsga3_core::benchmarks::ProblemSpec;
use nsga3_core::dynamics::oracles::{brute_force_layers, fitness_image};
use nsga3_core::dynamics::{max_antichain_oracle, LemmaId};
use nsga3_core::engine::{
    Engine, EngineConfig, Instrumentation, PopulationUpdate, Stop, SurvivalRule,
};
use nsga3_core::objective::ObjectiveVector;
use nsga3_core::refpoints::ReferencePointSet;
use nsga3_core::rng::{child_seed, RandomSource};
use nsga3_core::sorting::non_dominated_sort;

use crate::plan::ExperimentPlan;
use crate::runner::{self, PlanOutcome, RunOptions, CSV_HEADER};
use crate::{HarnessError, Result};

pub const OMM_SCALING: &str = include_str!("../presets/thm2-omm-scaling.toml");
pub const LOTZ_SCALING: &str = include_str!("../presets/thm1-lotz-scaling.toml");
pub const OJZJ_MU: &str = include_str!("../presets/thm6-ojzj-mu.toml");
pub const RRMO_UPDATE: &str = include_str!("../presets/rrmo-update.toml");

/// Criteria run by `verify` without `--full`.
pub const FAST: [u8; 7] = [1, 2, 3, 4, 6, 8, 10];
pub const ALL: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

const MASTER: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} [{:>2}] {}: {}",
            self.id, self.name, self.detail
        )
    }
}

fn criterion(id: u8, name: &'static str, passed: bool, detail: String) -> Criterion {
    Criterion {
        id,
        name,
        passed,
        detail,
    }
}

/// Runs the criteria in `ids` on `workers` threads, printing each line as
/// soon as it is known when `echo` is set.
pub fn run(ids: &[u8], workers: usize, echo: bool) -> Result<Vec<Criterion>> {
    if workers == 0 {
        return Err(HarnessError::Plan("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    pool.install(|| {
        let mut lemma_runs = None;
        let mut out = Vec::new();
        for &id in ids {
            let c = match id {
                1 | 2 => {
                    if lemma_runs.is_none() {
                        lemma_runs = Some(lemma_batch()?);
                    }
                    let runs = lemma_runs.as_deref().expect("computed");
                    if id == 1 {
                        normalization_bounds(runs)
                    } else {
                        same_reference(runs)
                    }
                }
                3 => protection_and_covers()?,
                4 => oracle_equivalence()?,
                5 => scaling(5, "OMM scaling", OMM_SCALING, 6.0, workers)?,
                6 => scaling(6, "LOTZ scaling", LOTZ_SCALING, 5.0, workers)?,
                7 => inverse_mu_law(workers)?,
                8 => stochastic_mechanics()?,
                9 => rrmo_comparison(workers)?,
                10 => determinism()?,
                _ => return Err(HarnessError::Plan(format!("no acceptance criterion {id}"))),
            };
            if echo {
                println!("{c}");
            }
            out.push(c);
        }
        Ok(out)
    })
}

fn instrumented(
    spec: ProblemSpec,
    mu: usize,
    update: PopulationUpdate,
    seed: u64,
    generations: u64,
) -> Result<Instrumentation> {
    let mut cfg = EngineConfig::new(spec, mu, update, seed);
    cfg.instrument = true;
    let mut engine = Engine::new(cfg)?;
    Ok(engine
        .run_until(Stop::Generations(generations))?
        .instrumentation)
}

fn lemma_specs() -> Result<Vec<ProblemSpec>> {
    Ok(vec![
        ProblemSpec::omm(20, 2)?,
        ProblemSpec::lotz(20, 2)?,
        ProblemSpec::cocz(20, 2)?,
        ProblemSpec::ojzj(20, 2, 3)?,
        ProblemSpec::rrmo(20, 2)?,
        ProblemSpec::omm(8, 4)?,
        ProblemSpec::lotz(8, 4)?,
        ProblemSpec::cocz(8, 4)?,
        ProblemSpec::ojzj(8, 4, 2)?,
        ProblemSpec::rrmo(10, 4)?,
    ])
}

/// Two seeds of 1000 generations per benchmark at the smallest admissible
/// population, shared by the normalization and association criteria.
fn lemma_batch() -> Result<Vec<(ProblemSpec, Instrumentation)>> {
    let jobs: Vec<(ProblemSpec, u64)> = lemma_specs()?
        .into_iter()
        .enumerate()
        .flat_map(|(i, spec)| {
            (0..2).map(move |s| (spec, child_seed(child_seed(MASTER, i as u64), s)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(spec, seed)| {
            let instr = instrumented(
                spec,
                spec.s_upper(),
                PopulationUpdate::Deterministic,
                seed,
                1000,
            )?;
            Ok((spec, instr))
        })
        .collect()
}

fn normalization_bounds(runs: &[(ProblemSpec, Instrumentation)]) -> Criterion {
    let checks: u64 = runs.iter().map(|r| r.1.lemma1_checks).sum();
    let violations: usize = runs.iter().map(|r| r.1.violations.count(LemmaId::L1)).sum();
    criterion(
        1,
        "normalization bounds",
        violations == 0 && checks >= 10_000,
        format!(
            "{checks} generations over five families and d in {{2,4}}, {violations} violations"
        ),
    )
}

fn same_reference(runs: &[(ProblemSpec, Instrumentation)]) -> Criterion {
    let pairs = |d: usize| -> u64 {
        runs.iter()
            .filter(|r| r.0.d() == d)
            .map(|r| r.1.lemma5_pairs)
            .sum()
    };
    let (two, four) = (pairs(2), pairs(4));
    let violations: usize = runs.iter().map(|r| r.1.violations.count(LemmaId::L5)).sum();
    criterion(
        2,
        "same reference iff same fitness",
        violations == 0 && two > 0 && four > 0 && two + four >= 100_000,
        format!(
            "{} first-layer pairs (d=2: {two}, d=4: {four}), {violations} violations",
            two + four
        ),
    )
}

fn protection_and_covers() -> Result<Criterion> {
    let specs = [
        ProblemSpec::omm(20, 2)?,
        ProblemSpec::lotz(20, 2)?,
        ProblemSpec::ojzj(20, 2, 2)?,
    ];
    let mut jobs = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        for a in [0u8, 1] {
            for s in 0..30 {
                jobs.push((
                    *spec,
                    a,
                    child_seed(child_seed(MASTER ^ 3, (2 * i) as u64 + a as u64), s),
                ));
            }
        }
    }
    let runs: Vec<Instrumentation> = jobs
        .par_iter()
        .map(|&(spec, a, seed)| {
            let update = PopulationUpdate::from_flag(a)?;
            instrumented(spec, (1 + a as usize) * (spec.n() + 1), update, seed, 300)
        })
        .collect::<Result<_>>()?;
    let count = |id| -> usize { runs.iter().map(|r| r.violations.count(id)).sum() };
    let ids = [LemmaId::L6, LemmaId::L7_1, LemmaId::L7_2, LemmaId::L7_3];
    let counts: Vec<usize> = ids.iter().map(|&id| count(id)).collect();
    let transitions: u64 = runs.iter().map(|r| r.transitions_checked).sum();
    let pareto: u64 = runs.iter().map(|r| r.pareto_transitions).sum();
    let listed = ids
        .iter()
        .zip(&counts)
        .map(|(id, c)| format!("{}={c}", id.as_str()))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(criterion(
        3,
        "protection and cover monotonicity",
        counts.iter().all(|&c| c == 0) && transitions >= 2000 && pareto > 0,
        format!(
            "{transitions} transitions ({pareto} from all-Pareto populations), violations {listed}"
        ),
    ))
}

fn oracle_equivalence() -> Result<Criterion> {
    let mut failures = Vec::new();

    let sort_mismatches = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = RandomSource::new(child_seed(MASTER ^ 4, i));
            let d = 1 + rng.below(4);
            let len = 1 + rng.below(64);
            let items: Vec<ObjectiveVector> = (0..len)
                .map(|_| ObjectiveVector::new((0..d).map(|_| rng.below(6) as u32).collect()))
                .collect();
            non_dominated_sort(&items).ok() != Some(brute_force_layers(&items))
        })
        .count();
    if sort_mismatches > 0 {
        failures.push(format!("{sort_mismatches} sorting mismatches"));
    }

    for (d, p) in [(2usize, 114u32), (4, 200)] {
        let refs = ReferencePointSet::generate(p, d)?;
        let mismatches = (0..10_000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomSource::new(child_seed(MASTER ^ p as u64, i));
                let v: Vec<f64> = (0..d).map(|_| rng.unit_f64()).collect();
                Ok(usize::from(
                    refs.associate(&v)? != refs.associate_oracle(&v)?,
                ))
            })
            .sum::<Result<usize>>()?;
        if mismatches > 0 {
            failures.push(format!(
                "{mismatches} association mismatches at d={d}, p={p}"
            ));
        }
    }

    let width = |spec: &ProblemSpec| -> Result<u128> {
        Ok(max_antichain_oracle(&fitness_image(spec)?)? as u128)
    };
    let mut closed = Vec::new();
    for n in 1..=12 {
        closed.push((ProblemSpec::lotz(n, 2)?, n as u128 + 1));
    }
    for d in [2usize, 4] {
        for n in (d..=12).step_by(d) {
            closed.push((
                ProblemSpec::cocz(n, d)?,
                ((n / d + 1) as u128).pow(d as u32 / 2),
            ));
        }
        for n in (d / 2..=12).step_by(d / 2) {
            closed.push((
                ProblemSpec::omm(n, d)?,
                ((2 * n / d + 1) as u128).pow(d as u32 / 2),
            ));
        }
    }
    for (spec, expected) in &closed {
        let w = width(spec)?;
        if w != *expected {
            failures.push(format!("{spec}: width {w}, closed form {expected}"));
        }
    }
    for n in [8, 12] {
        let spec = ProblemSpec::lotz(n, 4)?;
        let bound = spec.incomparable_set_bound();
        let w = width(&spec)?;
        if !(bound.lower.unwrap_or(0) <= w && w <= bound.upper) {
            failures.push(format!(
                "{spec}: width {w} outside {:?}..={}",
                bound.lower, bound.upper
            ));
        }
    }

    let detail = if failures.is_empty() {
        format!(
            "1000 sorts, 2x10000 associations, {} closed-form widths and 2 sandwiches agree",
            closed.len()
        )
    } else {
        failures.join("; ")
    };
    Ok(criterion(
        4,
        "oracle equivalence",
        failures.is_empty(),
        detail,
    ))
}

fn preset(text: &str, workers: usize) -> Result<PlanOutcome> {
    let plan = ExperimentPlan::from_toml(text)?;
    let options = RunOptions {
        workers: Some(workers),
        ..RunOptions::default()
    };
    runner::execute(&plan, &options)
}

fn medians(outcome: &PlanOutcome) -> Vec<u64> {
    outcome.summaries().iter().map(|(_, s)| s.median).collect()
}

fn scaling(
    id: u8,
    name: &'static str,
    text: &str,
    bound: f64,
    workers: usize,
) -> Result<Criterion> {
    let outcome = preset(text, workers)?;
    let m = medians(&outcome);
    let ratio = *m.last().expect("configurations") as f64 / m[0] as f64;
    let covered = outcome.all_covered();
    Ok(criterion(
        id,
        name,
        covered && ratio <= bound,
        format!("medians {m:?}, ratio {ratio:.2} (bound {bound}), all covered: {covered}"),
    ))
}

fn inverse_mu_law(workers: usize) -> Result<Criterion> {
    let outcome = preset(OJZJ_MU, workers)?;
    let m = medians(&outcome);
    let ratios: Vec<f64> = m.windows(2).map(|w| w[0] as f64 / w[1] as f64).collect();
    let passed = ratios.iter().all(|r| (1.4..=2.8).contains(r));
    Ok(criterion(
        7,
        "OJZJ inverse-mu law",
        passed,
        format!(
            "medians {m:?} at mu 31/62/124, ratios {:.2} and {:.2} (allowed 1.4..=2.8), all covered: {}",
            ratios[0],
            ratios[1],
            outcome.all_covered()
        ),
    ))
}

fn stochastic_mechanics() -> Result<Criterion> {
    let cases = [
        (ProblemSpec::rrmo(20, 2)?, 18usize),
        (ProblemSpec::ojzj(20, 2, 4)?, 42),
    ];
    let runs: Vec<(ProblemSpec, usize, Instrumentation)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(spec, mu))| {
            let seed = child_seed(MASTER ^ 8, i as u64);
            let instr = instrumented(spec, mu, PopulationUpdate::Stochastic, seed, 10_000)?;
            Ok((spec, mu, instr))
        })
        .collect::<Result<_>>()?;
    let mut passed = true;
    let mut parts = Vec::new();
    for (spec, mu, instr) in &runs {
        let expected = (mu / 2) as f64 / (2 * mu) as f64;
        let freq = instr.bypass_hits as f64 / instr.bypass_samples.max(1) as f64;
        let dominated =
            instr.dominated_survivor_generations as f64 / instr.bypass_samples.max(1) as f64;
        passed &=
            instr.bypass_samples >= 10_000 && (freq - expected).abs() <= 0.02 && dominated >= 0.1;
        parts.push(format!(
            "{spec} mu={mu}: bypass {freq:.4} vs {expected:.4}, dominated survivors in {:.1}% of {} generations",
            100.0 * dominated,
            instr.bypass_samples
        ));
    }
    Ok(criterion(
        8,
        "stochastic update mechanics",
        passed,
        parts.join("; "),
    ))
}

/// Parses `csv` and checks the header and the type of every field.
pub fn well_formed(csv: &[u8]) -> std::result::Result<usize, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv);
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or("empty CSV")?
        .map_err(|e| e.to_string())?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(format!("header {header:?}"));
    }
    let mut rows = 0;
    for record in records {
        let r = record.map_err(|e| e.to_string())?;
        let bad = r.len() != 14
            || r[0].is_empty()
            || [1, 2, 4, 5, 6, 8, 9, 10, 12, 13]
                .iter()
                .any(|&i| r[i].parse::<u64>().is_err())
            || !(r[3].is_empty() || r[3].parse::<u64>().is_ok())
            || r[7].parse::<f64>().is_err()
            || r[11].parse::<bool>().is_err();
        if bad {
            return Err(format!("row {}: {r:?}", rows + 1));
        }
        rows += 1;
    }
    Ok(rows)
}

fn rrmo_comparison(workers: usize) -> Result<Criterion> {
    let outcome = preset(RRMO_UPDATE, workers)?;
    let mut csv = Vec::new();
    runner::write_rows(outcome.rows(), &mut csv)?;
    let parsed = well_formed(&csv);
    let expected = outcome.configs.len() * 20;
    let table = outcome
        .summaries()
        .iter()
        .map(|(c, s)| {
            format!(
                "a={} median {} iqr {} covered {:.0}%",
                c.update.flag(),
                s.median,
                s.iqr,
                100.0 * s.coverage_rate
            )
        })
        .collect::<Vec<_>>()
        .join(" | ");
    let passed = outcome.configs.len() == 2 && parsed == Ok(expected);
    let detail = match parsed {
        Ok(rows) => format!("{rows} rows; {table}"),
        Err(e) => format!("malformed CSV: {e}"),
    };
    Ok(criterion(
        9,
        "RRMO update comparison (reported)",
        passed,
        detail,
    ))
}

const DETERMINISM_PLAN: &str = r#"
name = "determinism"
family = "ojzj"
d = 2
n = [10, 14]
k = [2]
a = [0, 1]
seeds = 4
master_seed = 10
budget = 400
"#;

/// Drops the trailing `wall_ms` field of every line.
pub fn without_wall_time(csv: &[u8]) -> String {
    String::from_utf8_lossy(csv)
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Result<Criterion> {
    let plan = ExperimentPlan::from_toml(DETERMINISM_PLAN)?;
    let csv = |workers| -> Result<String> {
        let options = RunOptions {
            workers: Some(workers),
            ..RunOptions::default()
        };
        let mut buf = Vec::new();
        runner::write_rows(runner::execute(&plan, &options)?.rows(), &mut buf)?;
        Ok(without_wall_time(&buf))
    };
    let first = csv(1)?;
    let again = csv(1)?;
    let parallel = csv(2)?;
    let rows = first.lines().count() - 1;
    Ok(criterion(
        10,
        "determinism",
        first == again && first == parallel,
        format!(
            "{rows} rows; rerun identical: {}, two workers identical: {}",
            first == again,
            first == parallel
        ),
    ))
}

/// The protection checker must flag a survival rule that ignores niches.
pub fn first_come_self_test() -> Result<Criterion> {
    let spec = ProblemSpec::omm(20, 2)?;
    let l6 = |survival| -> Result<usize> {
        let mut cfg = EngineConfig::new(spec, 21, PopulationUpdate::Deterministic, 2);
        cfg.instrument = true;
        cfg.survival = survival;
        let mut engine = Engine::new(cfg)?;
        let r = engine.run_until(Stop::Generations(300))?;
        Ok(r.instrumentation.violations.count(LemmaId::L6))
    };
    let (niching, first_come) = (l6(SurvivalRule::Niching)?, l6(SurvivalRule::FirstCome)?);
    Ok(criterion(
        0,
        "protection checker self-test",
        niching == 0 && first_come > 0,
        format!("L6 violations: niching {niching}, first-come {first_come}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for text in [OMM_SCALING, LOTZ_SCALING, OJZJ_MU, RRMO_UPDATE] {
            assert!(!ExperimentPlan::from_toml(text)
                .unwrap()
                .resolve()
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn strips_wall_time() {
        assert_eq!(without_wall_time(b"a,b,c\n1,2,3\n"), "a,b\n1,2");
    }

    #[test]
    fn rejects_malformed_csv() {
        let good = format!("{CSV_HEADER}\nOMM,4,2,,5,0,4,6.0,1,3,20,true,0,1\n");
        assert_eq!(well_formed(good.as_bytes()), Ok(1));
        assert!(well_formed(b"problem\n").is_err());
        assert!(well_formed(good.replace("true", "yes").as_bytes()).is_err());
    }

    #[test]
    fn unknown_criterion() {
        assert!(run(&[11], 1, false).is_err());
    }
}
