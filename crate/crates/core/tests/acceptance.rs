//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! `cargo test -p ergo-core --test acceptance -- 3 7` runs a subset.

use std::process::ExitCode;

use ergo_core::checks::{run, CHECKS};

fn main() -> ExitCode {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u32> = CHECKS.iter().map(|c| c.0).filter(|id| picked.is_empty() || picked.contains(id)).collect();
    let mut failed = 0;
    for id in &ids {
        let outcome = run(*id).expect("known id");
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", ids.len() - failed, ids.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
