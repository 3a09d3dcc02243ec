use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use nsga3_core::benchmarks::{Family, ProblemSpec};
use nsga3_core::refpoints::{point_count, ReferencePointSet};
use nsga3_harness::acceptance;
use nsga3_harness::plan::ExperimentPlan;
use nsga3_harness::runner::{self, RunOptions};
use nsga3_harness::HarnessError;

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNCOVERED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nsga3",
    version,
    about = "NSGA-III runtime experiments on pseudo-Boolean benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct RunFlags {
    /// Master seed, overriding the plan.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, overriding the plan.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Generation budget per run, overriding the plan.
    #[arg(long)]
    budget: Option<u64>,
    /// Skip the lemma checkers.
    #[arg(long)]
    no_instrument: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a plan that resolves to a single configuration.
    Run {
        plan: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run every configuration of a plan and print a summary per
    /// configuration.
    Sweep {
        plan: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the acceptance criteria (a fast subset unless --full).
    Verify {
        #[arg(long)]
        full: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the Pareto front of a benchmark.
    Front {
        family: Family,
        n: usize,
        d: usize,
        k: Option<usize>,
    },
    /// Print the reference point lattice.
    Refpoints { p: u32, d: usize },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config = err.downcast_ref::<HarnessError>().is_some_and(|e| {
                matches!(
                    e,
                    HarnessError::Plan(_) | HarnessError::Toml(_) | HarnessError::Core(_)
                )
            }) || err.downcast_ref::<nsga3_core::error::Error>().is_some();
            ExitCode::from(if config { EXIT_CONFIG } else { 101 })
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { plan, flags } => run_plan(&plan, &flags, true),
        Command::Sweep { plan, flags } => run_plan(&plan, &flags, false),
        Command::Verify { full, workers } => verify(full, workers),
        Command::Front { family, n, d, k } => {
            let spec = ProblemSpec::new(family, n, d, k)?;
            let out = io::stdout();
            let mut out = out.lock();
            for v in spec.enumerate_front()? {
                writeln!(
                    out,
                    "{}",
                    v.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Refpoints { p, d } => {
            let refs = ReferencePointSet::generate(p, d)?;
            let out = io::stdout();
            let mut out = out.lock();
            writeln!(out, "# {} points", point_count(p, d))?;
            for a in refs.iter() {
                writeln!(
                    out,
                    "{}",
                    a.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn run_plan(path: &Path, flags: &RunFlags, single: bool) -> Result<ExitCode> {
    let plan =
        ExperimentPlan::from_file(path).with_context(|| format!("reading {}", path.display()))?;
    if single && plan.resolve()?.len() != 1 {
        return Err(HarnessError::Plan(format!(
            "`run` needs a plan with one configuration, {} has {}; use `sweep`",
            path.display(),
            plan.resolve()?.len()
        ))
        .into());
    }
    let options = RunOptions {
        master_seed: flags.seed,
        workers: flags.workers,
        budget: flags.budget,
        instrument: flags.no_instrument.then_some(false),
    };
    let outcome = runner::execute(&plan, &options)?;
    let summaries = outcome.summaries();
    match &flags.out {
        Some(out) => {
            runner::write_rows(outcome.rows(), BufWriter::new(File::create(out)?))?;
            runner::write_summary(&summaries, io::stdout().lock())?;
            if outcome.total_violations() > 0 {
                let file = sibling(out, "violations.csv");
                runner::write_violations(&outcome, BufWriter::new(File::create(&file)?))?;
                eprintln!("violations written to {}", file.display());
            }
        }
        None => {
            runner::write_rows(outcome.rows(), io::stdout().lock())?;
            runner::write_summary(&summaries, io::stderr().lock())?;
            if outcome.total_violations() > 0 {
                runner::write_violations(&outcome, io::stderr().lock())?;
            }
        }
    }
    if outcome.total_violations() > 0 {
        return Ok(ExitCode::from(EXIT_VIOLATION));
    }
    if !outcome.all_covered() {
        return Ok(ExitCode::from(EXIT_UNCOVERED));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(full: bool, workers: Option<usize>) -> Result<ExitCode> {
    let workers =
        workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let self_test = acceptance::first_come_self_test()?;
    println!("{self_test}");
    let ids: &[u8] = if full {
        &acceptance::ALL
    } else {
        &acceptance::FAST
    };
    let results = acceptance::run(ids, workers, true)?;
    let failed = results.iter().filter(|c| !c.passed).count() + usize::from(!self_test.passed);
    println!("verify: {failed} failed");
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    })
}
