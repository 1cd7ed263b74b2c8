//! Tracking a moving optimum.
//!
//! Capacities and targets random-walk with per-step drift `γ` and `α`. The
//! price error settles below `b/(1−c)`, with `b` the worst-case per-step move
//! of the optimal price.
//!
//! ```bash
//! cargo run --release --example drifting_tracking
//! ```

use od3::model::Dimensions;
use od3::{derive_global_params, oracle, run_od3, synth_trace, vector, Od3Options, TraceSynthesis};

fn main() -> od3::Result<()> {
    let trace = synth_trace(&TraceSynthesis {
        dims: Dimensions::new(5, 2)?,
        horizon: 300,
        gamma: 0.2,
        alpha: 0.1,
        seed: 42,
        base_capacity: vec![6.0, 4.0],
        base_targets: vec![vec![2.0, 1.0]; 5],
        scales: Some(vec![0.8, 1.0, 1.2, 1.5, 2.0]),
    })?;
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace)?;
    let (b, c) = (params.drift_constant(), params.contraction_factor());
    println!(
        "sigma = {} L = {} gamma = {:.3} alpha = {:.3} eta = {:.4} c = {c:.4} b = {b:.4} floor b/(1-c) = {:.4}",
        params.sigma,
        params.lipschitz_grad,
        params.gamma,
        params.alpha,
        params.eta,
        b / (1.0 - c)
    );

    let traj = run_od3(&trace, &utilities, &params, &[0.0, 0.0], Od3Options::default())?;
    let opt = oracle::solve_trace(&utilities, &trace.capacities)?;
    let errors: Vec<f64> = traj.states.iter().zip(&opt).map(|(s, o)| vector::distance(&s.price, &o.price_opt)).collect();
    for t in (0..300).step_by(30) {
        println!("t = {t:3}  |p - p*| = {:.4}  |sum q - Q| = {:.4}", errors[t], vector::norm(&traj.states[t].excess));
    }
    let tail = errors[150..].iter().cloned().fold(0.0, f64::max);
    println!("largest error over the second half: {tail:.4}");
    Ok(())
}
