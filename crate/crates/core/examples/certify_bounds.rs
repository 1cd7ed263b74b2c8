//! Certify every bound along one run and print the per-bound summary.
//!
//! ```bash
//! cargo run --release --example certify_bounds
//! ```

use od3::bounds::{certify_run, CertifyOptions};
use od3::model::Dimensions;
use od3::{derive_global_params, oracle, run_od3, synth_trace, Od3Options, TraceSynthesis};

fn main() -> od3::Result<()> {
    let trace = synth_trace(&TraceSynthesis {
        dims: Dimensions::new(10, 1)?,
        horizon: 150,
        gamma: 0.1,
        alpha: 0.05,
        seed: 3,
        base_capacity: vec![12.0],
        base_targets: vec![vec![1.5]; 10],
        scales: None,
    })?;
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace)?;
    let traj = run_od3(&trace, &utilities, &params, &[0.0], Od3Options::default())?;
    let opt = oracle::solve_trace(&utilities, &trace.capacities)?;
    let report = certify_run(&utilities, &trace.capacities, &traj, &opt, &params, CertifyOptions::default())?;

    println!("c = {:.4}  b = {:.4}  L' = {:?}  eta in proven range: {}", report.c, report.b, report.lipschitz_value, report.eta_in_proven_range);
    for (bound, s) in report.summary() {
        println!(
            "{:<32} {:>6}/{:<6} worst slack {:>10.3e} at t = {:?}{}",
            bound.name(),
            s.passed,
            s.rows - s.flagged,
            s.worst_slack.unwrap_or(f64::NAN),
            s.argmin_step,
            if s.reference { "  (reference)" } else { "" }
        );
    }
    println!("certified: {}", report.all_certified());
    Ok(())
}
