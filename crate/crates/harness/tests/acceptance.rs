//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::Instant;

use nsga3_harness::acceptance;

fn main() -> ExitCode {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = Instant::now();
    let results = match acceptance::run(&acceptance::ALL, workers, true) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance battery aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let failed = results.iter().filter(|c| !c.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.0?}",
        results.len() - failed,
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
