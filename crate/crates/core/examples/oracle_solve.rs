//! The exact optimum of one step through the dual.
//!
//! The optimal price is the root of `Σ_i q_i(p) = Q`. For quadratic users it
//! has a closed form; any other family goes through bisection.
//!
//! ```bash
//! cargo run --example oracle_solve
//! ```

use od3::oracle::{self, SolveMethod};
use od3::QuadraticUtility;

fn main() -> od3::Result<()> {
    let users = vec![QuadraticUtility::unit(vec![3.0]), QuadraticUtility::unit(vec![5.0])];
    let capacity = [4.0];

    let closed = oracle::solve_step(&users, &capacity)?;
    let bisected = oracle::solve_step_with(&users, &capacity, SolveMethod::Bisection)?;
    println!("closed form: p* = {:?}, q* = {:?}, welfare {}", closed.price_opt, closed.allocations_opt, closed.welfare_opt);
    println!("bisection:   p* = {:?}, q* = {:?}, residual {:e}", bisected.price_opt, bisected.allocations_opt, bisected.residual);

    let dual = oracle::dual_value(&users, &capacity, &closed.price_opt);
    println!("dual value at p*: {dual} (duality gap {:e})", dual - closed.welfare_opt);
    for p in [0.0, 2.0, 4.0, 6.0] {
        println!("  D({p}) = {:7.3}  dD/dp = {:?}", oracle::dual_value(&users, &capacity, &[p]), oracle::dual_gradient(&users, &capacity, &[p]));
    }

    let many: Vec<QuadraticUtility> = (0..10).map(|i| QuadraticUtility::new(vec![1.0 + 0.1 * i as f64, 2.0], 1.0 + 0.2 * i as f64)).collect::<Result<_, _>>()?;
    let s = oracle::solve_step(&many, &[10.0, 15.0])?;
    println!("10 users, 2 suppliers: p* = {:?}, total welfare {:.4}", s.price_opt, s.welfare_opt);
    Ok(())
}
