//! Linear convergence when nothing drifts.
//!
//! Ten unit-scale users, fixed capacity, random initial price. With the
//! largest proven step size the price error shrinks at least by `c` per step.
//!
//! ```bash
//! cargo run --release --example static_contraction
//! ```

use od3::oracle;
use od3::{derive_global_params, run_od3, Od3Options, SystemTrace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> od3::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let targets: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random_range(0.5..2.0)]).collect();
    let trace = SystemTrace::with_static_targets(vec![vec![8.0]; 200], targets, vec![1.0; 10])?;
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace)?;
    let optimum = oracle::solve_step(&utilities[0], &trace.capacities[0])?;

    let p0 = vec![rng.random_range(-20.0..20.0)];
    let c = params.contraction_factor();
    println!("eta = {} c = {c:.6} p* = {:.6} p(0) = {:.6}", params.eta, optimum.price_opt[0], p0[0]);

    let traj = run_od3(&trace, &utilities, &params, &p0, Od3Options::default())?;
    let e0 = (p0[0] - optimum.price_opt[0]).abs();
    let mut worst: f64 = f64::INFINITY;
    for state in &traj.states {
        let e = (state.price[0] - optimum.price_opt[0]).abs();
        let envelope = c.powi(state.t as i32) * e0;
        worst = worst.min(envelope - e);
        if state.t % 10 == 0 && state.t <= 50 {
            println!("t = {:3}  |p - p*| = {e:.3e}  c^t |p(0) - p*| = {envelope:.3e}", state.t);
        }
    }
    println!("smallest envelope slack over 200 steps: {worst:.3e}");
    Ok(())
}
