//! Replay a recorded capacity series: ingest, rescale, validate, run.
//!
//! Reads the bundled sample (one synthetic day of biofuel, wind and solar
//! output at 5-minute resolution) unless a CSV path and column are given.
//!
//! ```bash
//! cargo run --release --example capacity_replay
//! cargo run --release --example capacity_replay -- my_data.csv total_mw
//! ```

use od3::experiment::{self, BaseTargets, CapacitySource, EtaChoice, RunConfig};
use od3::traces;

fn main() -> od3::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let column = args.get(1).cloned().unwrap_or_else(|| "total_mw".into());
    let series = match args.first() {
        Some(path) => traces::ingest_capacity_csv(path, std::slice::from_ref(&column))?,
        None => traces::read_capacity_csv(experiment::SAMPLE_CAPACITY_CSV.as_bytes(), std::slice::from_ref(&column), "bundled sample")?,
    };
    println!("{}: {} rows, largest step {:.2}", series.source, series.horizon(), series.realized_gamma);
    let (scaled, maps) = series.rescaled(9.0, 12.0)?;
    println!("rescaled: {:?}, largest step {:.4}", maps[0], scaled.realized_gamma);
    println!("claimed gamma 0.3 holds: {}", scaled.check_gamma(0.3).pass);

    let mut config = RunConfig::preset("sec5")?;
    config.capacity = CapacitySource::Csv {
        path: args.first().map(Into::into),
        columns: vec![column],
        rescale: Some([9.0, 12.0]),
    };
    config.targets.base = BaseTargets::Uniform(1.5);
    config.eta = EtaChoice::OneOverN;
    let outcome = experiment::run_experiment(&config, None)?;
    let welfare = outcome.online_welfare();
    for t in (0..outcome.trajectory.len()).step_by(36) {
        let s = &outcome.trajectory.states[t];
        let q = &outcome.prepared.trace.capacities[t];
        println!(
            "t = {t:3}  Q = {:.3}  sum q = {:.3}  welfare {:.4} (optimal {:.4})",
            q[0],
            s.excess[0] + q[0],
            welfare[t],
            outcome.oracle[t].welfare_opt
        );
    }
    Ok(())
}
