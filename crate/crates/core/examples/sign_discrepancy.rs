//! Why the price moves with the excess demand.
//!
//! Raising the price when users over-consume is gradient descent on the
//! dual. Flipping the sign pushes the price away from the optimum and the
//! error grows geometrically.
//!
//! ```bash
//! cargo run --example sign_discrepancy
//! ```

use od3::{derive_global_params, run_od3, Od3Options, SignConvention, SystemTrace};

fn main() -> od3::Result<()> {
    let trace = SystemTrace::with_static_targets(vec![vec![4.0]; 11], vec![vec![3.0], vec![5.0]], vec![1.0, 1.0])?;
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace)?.with_eta(0.4);
    for sign in [SignConvention::DualDescent, SignConvention::Reversed] {
        let traj = run_od3(&trace, &utilities, &params, &[0.0], Od3Options { sign, ..Default::default() })?;
        let errors: Vec<String> = traj.states.iter().map(|s| format!("{:.3}", (s.price[0] - 4.0).abs())).collect();
        println!("{sign:?}: |p - p*| = {}", errors.join(" "));
    }
    Ok(())
}
