//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are never captured.

use std::process::ExitCode;

use qhahn::suite::run_all;

fn main() -> ExitCode {
    let results = match run_all() {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL fixtures: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &results {
        println!("{}", r.line());
        if !r.pass {
            for d in &r.details {
                println!("    {d}");
            }
        }
    }
    if results.len() == 8 && results.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
