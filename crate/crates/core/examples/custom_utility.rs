//! Plug in a non-quadratic utility family.
//!
//! `U(q) = −Σ_j [(q_j − s_j)² + log cosh(q_j − s_j)]` has curvature between
//! 2 and 3 and no closed-form inverse gradient, so demand and the oracle
//! both go through bisection.
//!
//! ```bash
//! cargo run --release --example custom_utility
//! ```

use od3::bounds::{certify_run, CertifyOptions};
use od3::model::BoundingBox;
use od3::{derive_global_params, oracle, run_od3, Od3Options, SystemTrace, Utility};

#[derive(Debug, Clone)]
struct LogCosh {
    target: Vec<f64>,
}

impl Utility for LogCosh {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn value(&self, q: &[f64]) -> f64 {
        -q.iter().zip(&self.target).map(|(x, s)| (x - s).powi(2) + (x - s).cosh().ln()).sum::<f64>()
    }

    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        q.iter().zip(&self.target).map(|(x, s)| -2.0 * (x - s) - (x - s).tanh()).collect()
    }

    fn sigma(&self) -> f64 {
        2.0
    }

    fn lipschitz_grad(&self) -> f64 {
        3.0
    }

    fn lipschitz_value_on(&self, domain: &BoundingBox) -> f64 {
        let per_coord: Vec<f64> = (0..self.dim())
            .map(|j| {
                let d = (domain.lo[j] - self.target[j]).abs().max((domain.hi[j] - self.target[j]).abs());
                2.0 * d + d.tanh()
            })
            .collect();
        od3::vector::norm(&per_coord)
    }

    fn gradient_drift_to(&self, next: &Self) -> f64 {
        let per_coord: Vec<f64> = self
            .target
            .iter()
            .zip(&next.target)
            .map(|(a, b)| {
                let d = (a - b).abs();
                2.0 * d + 2.0 * (d / 2.0).tanh()
            })
            .collect();
        od3::vector::norm(&per_coord)
    }
}

fn main() -> od3::Result<()> {
    let horizon = 80;
    let trace = SystemTrace::with_static_targets(
        (0..horizon).map(|t| vec![6.0 + (t as f64 * 0.2).sin()]).collect(),
        vec![vec![1.0], vec![2.0], vec![4.0]],
        vec![1.0; 3],
    )?;
    let utilities: Vec<Vec<LogCosh>> = (0..horizon)
        .map(|t| {
            let shift = 0.05 * t as f64;
            [1.0, 2.0, 4.0].iter().map(|s| LogCosh { target: vec![s + shift] }).collect()
        })
        .collect();
    let params = derive_global_params(&utilities, &trace)?;
    println!("sigma = {} L = {} gamma = {:.4} alpha = {:.4} eta = {:.4}", params.sigma, params.lipschitz_grad, params.gamma, params.alpha, params.eta);

    let traj = run_od3(&trace, &utilities, &params, &[0.0], Od3Options::default())?;
    let opt = oracle::solve_trace(&utilities, &trace.capacities)?;
    for t in (0..horizon).step_by(10) {
        println!("t = {t:2}  p = {:8.4}  p* = {:8.4}", traj.states[t].price[0], opt[t].price_opt[0]);
    }
    let report = certify_run(&utilities, &trace.capacities, &traj, &opt, &params, CertifyOptions { probes: 20, ..Default::default() })?;
    for (bound, s) in report.summary() {
        println!("{:<32} pass rate {:?}", bound.name(), s.pass_rate);
    }
    Ok(())
}
