//! A small randomized certificate suite.
//!
//! ```bash
//! cargo run --release --example run_suite -- 20
//! ```

use od3::experiment::{run_suite, SuiteOptions};

fn main() -> od3::Result<()> {
    let seeds = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let outcome = run_suite(&SuiteOptions { seeds, ..SuiteOptions::default() })?;
    print!("{}", outcome.table());
    for run in outcome.runs.iter().filter(|r| !r.certified) {
        println!("seed {} (N = {}, R = {}, gamma = {}, alpha = {}): {} failing rows", run.seed, run.n_users, run.n_suppliers, run.gamma, run.alpha, run.failures.len());
    }
    Ok(())
}
