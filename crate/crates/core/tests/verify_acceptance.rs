//! Acceptance battery. Prints one PASS/FAIL line per criterion followed by
//! its individual checks; exits non-zero if any criterion fails.
//!
//! `cargo test -p radner-core --test verify_acceptance -- 2 9` runs only the
//! listed criteria.

use std::process::ExitCode;
use std::time::Instant;

use radner_core::verify::{Battery, VerifyConfig, CRITERIA};

fn main() -> ExitCode {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let battery = Battery::new(VerifyConfig::default());
    let mut failed = vec![];
    for n in CRITERIA.filter(|n| picked.is_empty() || picked.contains(n)) {
        let t = Instant::now();
        let checks = battery.run(n);
        let ok = checks.iter().all(|c| c.passed);
        println!("{} criterion {n:>2} ({} checks, {:.2?})", if ok { "PASS" } else { "FAIL" }, checks.len(), t.elapsed());
        for c in &checks {
            println!("    {:<4} {}", if c.passed { "ok" } else { "fail" }, c.detail());
        }
        if !ok {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
