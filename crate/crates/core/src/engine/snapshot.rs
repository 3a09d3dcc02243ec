//! Plain-text engine snapshots for resume and debugging.
//!
//! ```text
//! nsga3-snapshot v1
//! problem OJZJ
//! n 20
//! d 2
//! k 3
//! mu 21
//! a 0
//! p 160
//! eps_nad 23
//! seed 7
//! generation 120
//! rng_draws 53312
//! y_min 0 1
//! y_max 23 23
//! extremes 2
//! 23 3
//! 3 23
//! population 21
//! fffe0
//! ...
//! ```
//!
//! One `key value` pair per line in this order. Reals use the shortest
//! representation that reads back exactly (`inf` and `-inf` included).
//! Extreme points are space-separated objective values, one per line.
//! Genotypes are big-endian hex rows, left-padded to whole nibbles. The RNG is
//! restored by replaying `rng_draws` draws from `seed`. Instrumentation
//! counters are not part of the snapshot.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use super::{Engine, EngineConfig, PopulationUpdate};
use crate::benchmarks::{Family, ProblemSpec};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::normalization::NormalizerState;
use crate::objective::ObjectiveVector;
use crate::refpoints::{required_p, ReferencePointSet};
use crate::rng::RandomSource;

const MAGIC: &str = "nsga3-snapshot v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub config: EngineConfig,
    pub generation: u64,
    pub rng_draws: u64,
    pub y_min: Vec<f64>,
    pub y_max: Vec<f64>,
    pub extremes: Vec<ObjectiveVector>,
    pub population: Vec<BitString>,
}

fn join<T: fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (i, x) in xs.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x}");
    }
    out
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "{MAGIC}")?;
        writeln!(f, "problem {}", c.spec.family())?;
        writeln!(f, "n {}", c.spec.n())?;
        writeln!(f, "d {}", c.spec.d())?;
        match c.spec.k() {
            Some(k) => writeln!(f, "k {k}")?,
            None => writeln!(f, "k -")?,
        }
        writeln!(f, "mu {}", c.mu)?;
        writeln!(f, "a {}", c.update.flag())?;
        writeln!(f, "p {}", c.p)?;
        writeln!(f, "eps_nad {}", c.eps_nad)?;
        writeln!(f, "seed {}", c.seed)?;
        writeln!(f, "generation {}", self.generation)?;
        writeln!(f, "rng_draws {}", self.rng_draws)?;
        writeln!(f, "y_min {}", join(&self.y_min))?;
        writeln!(f, "y_max {}", join(&self.y_max))?;
        writeln!(f, "extremes {}", self.extremes.len())?;
        for e in &self.extremes {
            writeln!(f, "{}", join(e.iter()))?;
        }
        writeln!(f, "population {}", self.population.len())?;
        for x in &self.population {
            writeln!(f, "{}", x.to_hex())?;
        }
        Ok(())
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

fn bad(line: usize, msg: impl fmt::Display) -> Error {
    Error::Snapshot(format!("line {}: {msg}", line + 1))
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i, l.trim_end()))
            .ok_or_else(|| Error::Snapshot("unexpected end of snapshot".into()))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (i, line) = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((i, v)),
            _ => Err(bad(i, format!("expected `{key} <value>`"))),
        }
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (i, v) = self.field(key)?;
        v.parse()
            .map_err(|_| bad(i, format!("cannot parse {key} from `{v}`")))
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let (i, v) = self.field(key)?;
        parse_row(i, v)
    }
}

fn parse_row<T: FromStr>(i: usize, v: &str) -> Result<Vec<T>> {
    v.split_whitespace()
        .map(|x| x.parse().map_err(|_| bad(i, format!("cannot parse `{x}`"))))
        .collect()
}

impl FromStr for Snapshot {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
        };
        let (i, magic) = lines.next_line()?;
        if magic != MAGIC {
            return Err(bad(i, format!("expected `{MAGIC}`")));
        }
        let family: Family = lines.parse("problem")?;
        let n: usize = lines.parse("n")?;
        let d: usize = lines.parse("d")?;
        let (i, k) = lines.field("k")?;
        let k = match k {
            "-" => None,
            k => Some(
                k.parse()
                    .map_err(|_| bad(i, format!("cannot parse k from `{k}`")))?,
            ),
        };
        let spec = ProblemSpec::new(family, n, d, k)?;
        let mu: usize = lines.parse("mu")?;
        let update = PopulationUpdate::from_flag(lines.parse("a")?)?;
        let p: u32 = lines.parse("p")?;
        let eps_nad: f64 = lines.parse("eps_nad")?;
        let seed: u64 = lines.parse("seed")?;
        let generation = lines.parse("generation")?;
        let rng_draws = lines.parse("rng_draws")?;
        let y_min = lines.list("y_min")?;
        let y_max = lines.list("y_max")?;
        let count: usize = lines.parse("extremes")?;
        let mut extremes = Vec::with_capacity(count);
        for _ in 0..count {
            let (i, row) = lines.next_line()?;
            let values: Vec<u32> = parse_row(i, row)?;
            if values.len() != d {
                return Err(bad(
                    i,
                    format!("extreme point has {} values, expected {d}", values.len()),
                ));
            }
            extremes.push(ObjectiveVector::new(values));
        }
        if y_min.len() != d || y_max.len() != d {
            return Err(Error::Snapshot(format!("y_min and y_max need {d} values")));
        }
        let count: usize = lines.parse("population")?;
        let mut population = Vec::with_capacity(count);
        for _ in 0..count {
            let (i, row) = lines.next_line()?;
            population.push(BitString::from_hex(row, n).map_err(|e| bad(i, e))?);
        }
        if let Some((i, extra)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
            return Err(bad(i, format!("trailing content `{extra}`")));
        }
        let mut config = EngineConfig::new(spec, mu, update, seed);
        config.p = p;
        config.p_override = p < required_p(&spec);
        config.eps_nad = eps_nad;
        Ok(Self {
            config,
            generation,
            rng_draws,
            y_min,
            y_max,
            extremes,
            population,
        })
    }
}

impl Engine {
    pub fn snapshot(&self) -> Snapshot {
        let norm = &self.state.normalizer;
        Snapshot {
            config: self.config.clone(),
            generation: self.state.generation,
            rng_draws: self.state.rng.draws(),
            y_min: norm.y_min.clone(),
            y_max: norm.y_max.clone(),
            extremes: norm.extremes.clone(),
            population: self
                .state
                .population
                .iter()
                .map(|x| x.genotype.clone())
                .collect(),
        }
    }

    /// Continues a run from a snapshot. Fields of `snapshot.config` that the
    /// text format does not carry (instrumentation, budget) can be set before
    /// calling this.
    pub fn restore(
        snapshot: Snapshot,
        refset: Arc<ReferencePointSet>,
        front: Option<Arc<std::collections::BTreeSet<ObjectiveVector>>>,
    ) -> Result<Self> {
        let Snapshot {
            config,
            generation,
            rng_draws,
            y_min,
            y_max,
            extremes,
            population,
        } = snapshot;
        let rng = RandomSource::resume(config.seed, rng_draws);
        let mut engine = Self::assemble(config, refset, front, population, rng, generation)?;
        let eps = engine.config.eps_nad;
        engine.state.normalizer = NormalizerState {
            y_min,
            y_max,
            extremes,
            eps_nad: eps,
        };
        Ok(engine)
    }
}
