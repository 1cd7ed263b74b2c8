//! The accumulated drift floor, attained exactly.
//!
//! A single unit-scale user whose capacity rises by `γ` every step, run at
//! the largest proven step size. The price error obeys
//! `e(t+1) = c·e(t) + b` with equality, so it converges to `b/(1−c)` and the
//! allocation error to `b/(σ(1−c))`. The quoted primal envelope only allows
//! `b/σ` once the transient is gone; the accumulated one is met with equality.
//!
//! ```bash
//! cargo run --example envelope_counterexample
//! ```

use od3::bounds::{cert_dual_tracking, cert_primal_tracking, BoundId};
use od3::{derive_global_params, oracle, run_od3, Od3Options, SystemTrace};

fn main() -> od3::Result<()> {
    let gamma = 0.1;
    let trace = SystemTrace::with_static_targets((0..60).map(|t| vec![5.0 + gamma * t as f64]).collect(), vec![vec![10.0]], vec![1.0])?;
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace)?;
    let p0 = oracle::aggregate_inverse(&utilities[0], &trace.capacities[0])?;
    let traj = run_od3(&trace, &utilities, &params, &p0, Od3Options::default())?;
    let opt = oracle::solve_trace(&utilities, &trace.capacities)?;
    let (b, c) = (params.drift_constant(), params.contraction_factor());
    println!("eta = {} c = {c} b = {b:.4} b/(1-c) = {:.4}", params.eta, b / (1.0 - c));

    let primal = cert_primal_tracking(&traj, &opt, &params)?;
    let dual = cert_dual_tracking(&traj, &opt, &params)?;
    for t in [0, 1, 2, 5, 10, 30, 58] {
        let get = |rows: &[od3::bounds::BoundRow], id| rows.iter().find(|r| r.t == t && r.bound == id).cloned().unwrap();
        let quoted = get(&primal, BoundId::PrimalTracking);
        let acc = get(&primal, BoundId::PrimalTrackingAccumulated);
        let d = get(&dual, BoundId::DualTracking);
        println!(
            "t = {t:2}  |q - q*| = {:.6}  quoted {:.6} ({})  accumulated {:.6} ({})  dual quoted ok: {}",
            quoted.lhs,
            quoted.rhs,
            if quoted.pass { "ok" } else { "violated" },
            acc.rhs,
            if acc.pass { "ok" } else { "violated" },
            d.pass
        );
    }
    Ok(())
}
