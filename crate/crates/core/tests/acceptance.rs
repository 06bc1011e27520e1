//! Runs the eight acceptance criteria and prints one line per criterion.

use std::process::ExitCode;

use timemap_core::quadrature::QuadratureConfig;
use timemap_core::verify::CRITERIA;

fn main() -> ExitCode {
    let q = QuadratureConfig::default();
    let mut failed = 0;
    for criterion in CRITERIA {
        let report = criterion(&q);
        println!("{}", report.line());
        for f in report.failures.iter().skip(1) {
            println!("    {f}");
        }
        if !report.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERIA.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
