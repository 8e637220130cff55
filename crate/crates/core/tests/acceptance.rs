use std::process::ExitCode;

use spa_core::suite::{run_suite, SuiteConfig};

fn main() -> ExitCode {
    let results = run_suite(&SuiteConfig::default());
    for c in &results {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {}: {}", c.id, c.name, c.detail);
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
