//! Acceptance criteria 1 to 10 at their full trial counts. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use quadstab::battery::{run_suite, summary_line, BatteryConfig, CRITERIA};

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes arguments through; honour a numeric filter.
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = BatteryConfig::default();
    let mut failed = 0;
    println!("running {} acceptance criteria (seed {})", CRITERIA.len(), cfg.seed);
    for (criterion, _, _) in CRITERIA {
        if !only.is_empty() && !only.contains(&criterion) {
            continue;
        }
        let start = Instant::now();
        match run_suite(criterion, &cfg) {
            Ok(report) => {
                println!("{} [{:.1}s]", summary_line(&report), start.elapsed().as_secs_f64());
                for w in &report.witnesses {
                    println!("      {w}");
                }
                if !report.passed() {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("FAIL {criterion:>2}: error {e}");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
