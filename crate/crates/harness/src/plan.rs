//! Experiment plans read from TOML.
//!
//! ```toml
//! name = "thm6-ojzj-mu"
//! family = "ojzj"        # lotz | omm | cocz | ojzj | rrmo
//! d = 2
//! n = [30]
//! k = [3]                # OJZJ only
//! a = [0]                # update flags, default [0]
//! mu = { factors = [1, 2, 4] }   # "auto" | [31, 62] | { factors = [...] }
//! p = "required"         # "required" | "theorem" | integer
//! p_override = false     # allow p below required_p
//! eps_nad = "fmax"       # "fmax" | number
//! seeds = 30
//! master_seed = 2024
//! budget = "auto"        # "auto" | generations
//! workers = 1
//! instrument = true
//! ```
//!
//! `mu = "auto"` is `(1+a)` times the `|S_d|` upper bound and the factors
//! multiply that value. Configurations are the product `n × k × a × mu` in
//! that nesting order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use nsga3_core::benchmarks::{Family, ProblemSpec};
use nsga3_core::engine::PopulationUpdate;
use nsga3_core::refpoints::{required_p, theorem_p};

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuRule {
    Auto(AutoKeyword),
    List(Vec<usize>),
    Factors { factors: Vec<usize> },
}

impl Default for MuRule {
    fn default() -> Self {
        Self::Auto(AutoKeyword::Auto)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PKeyword {
    Required,
    Theorem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PRule {
    Named(PKeyword),
    Fixed(u32),
}

impl Default for PRule {
    fn default() -> Self {
        Self::Named(PKeyword::Required)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsKeyword {
    Fmax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsRule {
    Named(EpsKeyword),
    Value(f64),
}

impl Default for EpsRule {
    fn default() -> Self {
        Self::Named(EpsKeyword::Fmax)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetRule {
    Auto(AutoKeyword),
    Generations(u64),
}

impl Default for BudgetRule {
    fn default() -> Self {
        Self::Auto(AutoKeyword::Auto)
    }
}

fn default_flags() -> Vec<u8> {
    vec![0]
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    pub family: String,
    pub d: usize,
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default = "default_flags")]
    pub a: Vec<u8>,
    #[serde(default)]
    pub mu: MuRule,
    #[serde(default)]
    pub p: PRule,
    #[serde(default)]
    pub p_override: bool,
    #[serde(default)]
    pub eps_nad: EpsRule,
    pub seeds: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub budget: BudgetRule,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "yes")]
    pub instrument: bool,
}

/// One fully resolved configuration of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub index: usize,
    pub spec: ProblemSpec,
    pub mu: usize,
    pub update: PopulationUpdate,
    pub p: u32,
    pub p_override: bool,
    pub eps_nad: f64,
    pub budget: u64,
    pub instrument: bool,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Plan(msg.into()))
}

/// Hundred times the leading-order generation bound with constant one.
pub fn auto_budget(spec: &ProblemSpec, mu: usize) -> u64 {
    let n = spec.n() as f64;
    let d = spec.d() as f64;
    let s = spec.s_upper() as f64;
    let bound = match spec.family() {
        Family::Lotz => n * n,
        Family::Omm | Family::Cocz => n * n.ln(),
        Family::Ojzj => {
            let k = spec.k().unwrap_or(0) as i32;
            d * n.powi(k) * s / mu as f64 + n * n.ln()
        }
        Family::Rrmo => {
            let u = spec.rrmo_unit();
            let mut valley = n;
            for i in 1..=u {
                valley *= 12.0 * n / i as f64;
            }
            n.powi(3) + valley
        }
    };
    let budget = (100.0 * bound).ceil();
    if budget >= u64::MAX as f64 {
        u64::MAX
    } else {
        budget as u64
    }
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Plan(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn family(&self) -> Result<Family> {
        self.family
            .parse()
            .map_err(|_| HarnessError::Plan(format!("unknown family `{}`", self.family)))
    }

    /// Expands the plan into its configurations and checks every
    /// precondition.
    pub fn resolve(&self) -> Result<Vec<RunConfig>> {
        let family = self.family()?;
        if self.seeds == 0 {
            return invalid("seeds must be at least 1");
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1");
        }
        if self.n.is_empty() {
            return invalid("n must list at least one size");
        }
        if self.a.is_empty() {
            return invalid("a must list at least one update flag");
        }
        let ks: Vec<Option<usize>> = match (family, self.k.is_empty()) {
            (Family::Ojzj, true) => return invalid("OJZJ needs k"),
            (Family::Ojzj, false) => self.k.iter().map(|&k| Some(k)).collect(),
            (_, true) => vec![None],
            (_, false) => return invalid(format!("{family} takes no k")),
        };
        let mut out = Vec::new();
        for &n in &self.n {
            for &k in &ks {
                let spec = ProblemSpec::new(family, n, self.d, k)?;
                for &a in &self.a {
                    let update = PopulationUpdate::from_flag(a)?;
                    let base = (1 + a as usize).saturating_mul(spec.s_upper());
                    let mus: Vec<usize> = match &self.mu {
                        MuRule::Auto(_) => vec![base],
                        MuRule::List(list) => list.clone(),
                        MuRule::Factors { factors } => {
                            factors.iter().map(|f| f.saturating_mul(base)).collect()
                        }
                    };
                    if mus.is_empty() {
                        return invalid("mu resolves to no population size");
                    }
                    for mu in mus {
                        if mu < base {
                            return invalid(format!(
                                "{spec}, a={a}: mu = {mu} is below (1+a)|S_d| = {base}"
                            ));
                        }
                        let required = required_p(&spec);
                        let p = match self.p {
                            PRule::Named(PKeyword::Required) => required,
                            PRule::Named(PKeyword::Theorem) => theorem_p(&spec),
                            PRule::Fixed(p) => p,
                        };
                        if p < required && !self.p_override {
                            return invalid(format!(
                                "{spec}: p = {p} is below required_p = {required}; set p_override"
                            ));
                        }
                        let eps_nad = match self.eps_nad {
                            EpsRule::Named(EpsKeyword::Fmax) => f64::from(spec.f_max()),
                            EpsRule::Value(e) if e.is_finite() && e >= 0.0 => e,
                            EpsRule::Value(e) => return invalid(format!("eps_nad = {e}")),
                        };
                        let budget = match self.budget {
                            BudgetRule::Auto(_) => auto_budget(&spec, mu),
                            BudgetRule::Generations(g) => g,
                        };
                        out.push(RunConfig {
                            index: out.len(),
                            spec,
                            mu,
                            update,
                            p,
                            p_override: p < required,
                            eps_nad,
                            budget,
                            instrument: self.instrument,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}
