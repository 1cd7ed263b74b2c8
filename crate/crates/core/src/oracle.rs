//! Exact per-step optimum of the allocation problem
//!
//! ```text
//!   maximize  Σ_i U_i^t(q_i)   subject to  Σ_i q_i = Q(t)
//! ```
//!
//! through its dual. With `Γ_t(p) = Σ_i [∇U_i^t]^{-1}(p)` the aggregate demand
//! at price `p`, the dual gradient is `∇D_t(p) = Q(t) − Γ_t(p)` and the optimal
//! price is the unique root of `Γ_t(p) = Q(t)`. `Γ_t` is strictly decreasing
//! and, for separable utilities, separable across suppliers, so each price
//! coordinate is found independently.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{local_demand, Utility};
use crate::roots::{self, Tolerance};
use crate::vector;

/// Optimal price and allocations for one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub price_opt: Vec<f64>,
    /// One allocation vector per user.
    pub allocations_opt: Vec<Vec<f64>>,
    pub welfare_opt: f64,
    /// `‖Σ_i q_i* − Q(t)‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SolveMethod {
    /// Closed form when every user has an affine inverse gradient, bisection otherwise.
    #[default]
    Auto,
    /// Always use per-coordinate bisection.
    Bisection,
}

/// `Γ_t(p)`: total demand at price `p`.
pub fn aggregate_demand<U: Utility>(users: &[U], price: &[f64]) -> Vec<f64> {
    let demands: Vec<Vec<f64>> = users.iter().map(|u| local_demand(u, price)).collect();
    vector::sum_columns(&demands, price.len())
}

pub fn welfare<U: Utility>(users: &[U], allocations: &[Vec<f64>]) -> f64 {
    users.iter().zip(allocations).map(|(u, q)| u.value(q)).sum()
}

/// Dual function `D_t(p) = Σ_i U_i(q_i(p)) − pᵀ(Σ_i q_i(p) − Q)`.
pub fn dual_value<U: Utility>(users: &[U], capacity: &[f64], price: &[f64]) -> f64 {
    let demands: Vec<Vec<f64>> = users.iter().map(|u| local_demand(u, price)).collect();
    let total = vector::sum_columns(&demands, price.len());
    welfare(users, &demands) - vector::dot(price, &vector::sub(&total, capacity))
}

/// `∇D_t(p) = Q − Γ_t(p)`.
pub fn dual_gradient<U: Utility>(users: &[U], capacity: &[f64], price: &[f64]) -> Vec<f64> {
    vector::sub(capacity, &aggregate_demand(users, price))
}

pub fn solve_step<U: Utility>(users: &[U], capacity: &[f64]) -> Result<OracleSolution> {
    solve_step_with(users, capacity, SolveMethod::Auto)
}

pub fn solve_step_with<U: Utility>(users: &[U], capacity: &[f64], method: SolveMethod) -> Result<OracleSolution> {
    if users.is_empty() {
        return Err(Error::param("users", "at least one user is required"));
    }
    let r = capacity.len();
    if let Some(bad) = users.iter().find(|u| u.dim() != r) {
        return Err(Error::DimensionMismatch {
            context: "utility dimension vs capacity",
            expected: r,
            actual: bad.dim(),
        });
    }
    let price_opt = match (method, closed_form_price(users, capacity)) {
        (SolveMethod::Auto, Some(p)) => p,
        _ => bisection_price(users, capacity)?,
    };
    let allocations_opt: Vec<Vec<f64>> = users.iter().map(|u| local_demand(u, &price_opt)).collect();
    let total = vector::sum_columns(&allocations_opt, r);
    let residual = vector::distance(&total, capacity);
    let welfare_opt = welfare(users, &allocations_opt);
    Ok(OracleSolution {
        price_opt,
        allocations_opt,
        welfare_opt,
        residual,
    })
}

/// `p* = (Σ offset_i − Q) / Σ slope_i` when every inverse gradient is affine.
fn closed_form_price<U: Utility>(users: &[U], capacity: &[f64]) -> Option<Vec<f64>> {
    let mut offset = vec![0.0; capacity.len()];
    let mut slope = 0.0;
    for u in users {
        let inv = u.affine_inverse()?;
        for (o, x) in offset.iter_mut().zip(&inv.offset) {
            *o += x;
        }
        slope += inv.slope;
    }
    Some(offset.iter().zip(capacity).map(|(o, q)| (o - q) / slope).collect())
}

fn bisection_price<U: Utility>(users: &[U], capacity: &[f64]) -> Result<Vec<f64>> {
    let r = capacity.len();
    let mut price = vec![0.0; r];
    for j in 0..r {
        let gamma_j = |x: f64| {
            let mut p = vec![0.0; r];
            p[j] = x;
            users.iter().map(|u| local_demand(u, &p)[j]).sum::<f64>()
        };
        let tol = Tolerance {
            residual: 1e-12 * (1.0 + capacity[j].abs()),
            ..Tolerance::default()
        };
        price[j] = roots::solve_decreasing(gamma_j, capacity[j], 0.0, 1.0, &tol, j)?.x;
    }
    Ok(price)
}

/// `Γ_t^{-1}(Q)`, the price at which total demand equals `capacity`.
pub fn aggregate_inverse<U: Utility>(users: &[U], capacity: &[f64]) -> Result<Vec<f64>> {
    Ok(solve_step(users, capacity)?.price_opt)
}

/// Per-step oracle over a utility series `[t][i]` and capacities `[t]`.
pub fn solve_trace<U: Utility>(utilities: &[Vec<U>], capacities: &[Vec<f64>]) -> Result<Vec<OracleSolution>> {
    if utilities.len() != capacities.len() {
        return Err(Error::DimensionMismatch {
            context: "utility series length vs capacity steps",
            expected: capacities.len(),
            actual: utilities.len(),
        });
    }
    utilities
        .iter()
        .zip(capacities)
        .map(|(users, q)| solve_step(users, q))
        .collect()
}

/// Measured curvature of `D_t` next to the constants it is predicted to obey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCurvature {
    /// Smallest secant curvature `⟨∇D(p+hd) − ∇D(p), hd⟩ / h²` observed.
    pub measured_strong_convexity: f64,
    /// Largest secant gradient ratio `‖∇D(p+hd) − ∇D(p)‖ / h` observed.
    pub measured_smoothness: f64,
    /// `Nσ/L²`, from monotonicity of the aggregate inverse gradient.
    pub derived_strong_convexity: f64,
    /// `N/σ`, from Lipschitz continuity of the aggregate inverse gradient.
    pub derived_smoothness: f64,
    /// `N/L`, as the dual's strong-convexity constant is commonly quoted.
    pub quoted_strong_convexity: f64,
    /// `Nσ`, as the dual's smoothness constant is commonly quoted.
    pub quoted_smoothness: f64,
}

impl DualCurvature {
    /// Whether the quoted and derived constants agree (they do when `σ = L`
    /// and `σ = 1` respectively).
    pub fn quoted_constants_agree(&self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        close(self.quoted_strong_convexity, self.derived_strong_convexity)
            && close(self.quoted_smoothness, self.derived_smoothness)
    }
}

/// Probe the curvature of `D_t` along random directions around `center`.
pub fn measure_dual_curvature<U: Utility, G: Rng>(
    users: &[U],
    capacity: &[f64],
    center: &[f64],
    sigma: f64,
    lipschitz_grad: f64,
    probes: usize,
    rng: &mut G,
) -> DualCurvature {
    let n = users.len() as f64;
    let r = capacity.len();
    let mut min_curv = f64::INFINITY;
    let mut max_lip: f64 = 0.0;
    for _ in 0..probes {
        let p: Vec<f64> = center.iter().map(|c| c + 10.0 * (rng.random::<f64>() - 0.5)).collect();
        let d: Vec<f64> = (0..r).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = vector::norm(&d);
        if len < 1e-12 {
            continue;
        }
        let h = 0.5 + rng.random::<f64>();
        let step = vector::scale(&d, h / len);
        let g0 = dual_gradient(users, capacity, &p);
        let g1 = dual_gradient(users, capacity, &vector::add(&p, &step));
        let dg = vector::sub(&g1, &g0);
        min_curv = min_curv.min(vector::dot(&dg, &step) / (h * h));
        max_lip = max_lip.max(vector::norm(&dg) / h);
    }
    DualCurvature {
        measured_strong_convexity: min_curv,
        measured_smoothness: max_lip,
        derived_strong_convexity: n * sigma / (lipschitz_grad * lipschitz_grad),
        derived_smoothness: n / sigma,
        quoted_strong_convexity: n / lipschitz_grad,
        quoted_smoothness: n * sigma,
    }
}
