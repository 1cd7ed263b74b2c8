//! Ten users sharing one supplier over a day of recorded capacity, with
//! step size `1/N`, writing the plot-ready artifacts.
//!
//! ```bash
//! cargo run --release --example reproduce_day -- out/day
//! ```

use od3::experiment::{run_experiment, RunConfig};

fn main() -> od3::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/day".into());
    let config = RunConfig::preset("sec5")?;
    let outcome = run_experiment(&config, Some(out.as_ref()))?;
    let meta = outcome.meta();
    println!("T = {} eta = {} (proven max {:.4}, in range: {})", meta.horizon, meta.eta, meta.eta_max, meta.eta_in_proven_range);

    let welfare = outcome.online_welfare();
    let mut worst_share: f64 = 0.0;
    for (t, s) in outcome.trajectory.states.iter().enumerate().skip(10) {
        let q = outcome.prepared.trace.capacities[t][0];
        worst_share = worst_share.max(s.excess[0].abs() / q);
    }
    let gaps: Vec<f64> = welfare.iter().zip(&outcome.oracle).map(|(w, o)| (w - o.welfare_opt).abs()).collect();
    println!("largest |sum q - Q| / Q after 10 steps: {:.3}%", 100.0 * worst_share);
    println!("welfare gap: first step {:.4}, largest over the last half {:.4}", gaps[0], gaps[gaps.len() / 2..].iter().cloned().fold(0.0, f64::max));
    println!("artifacts written to {out}");
    Ok(())
}
