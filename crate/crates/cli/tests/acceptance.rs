//! Runs the sixteen acceptance checks at full sample counts and prints one
//! line per check. Exits non-zero if an asserted check fails.

use dkmeasure_cli::report::Status;
use dkmeasure_cli::suite::{run_check, SuiteOptions, CHECK_COUNT};

fn main() {
    let opts = SuiteOptions { seed: 7, quick: false };
    let mut failed = Vec::new();
    println!("acceptance suite, seed {}", opts.seed);
    for id in 1..=CHECK_COUNT {
        let rec = run_check(id, &opts).expect("every id has a check");
        println!("{}", rec.line());
        if rec.status == Status::Fail {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all asserted checks passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
