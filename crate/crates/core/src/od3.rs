//! The online price-coordination loop.
//!
//! Each step the supplier side broadcasts a price, every user answers with
//! its local demand at that price, the suppliers meter the aggregate excess
//! `Σ_i q_i(t) − Q(t)` and move the price. Information flows one way per
//! role: users see only the price and their own utility ([`respond`]), the
//! [`PriceCoordinator`] sees only the metered excess.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{local_demand, GlobalParams, Utility};
use crate::traces::SystemTrace;
use crate::vector;

/// Direction of the price update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// `p(t+1) = p(t) + η·excess`: a gradient step `p − η∇D_t(p)` on the dual.
    /// Prices rise under excess demand.
    #[default]
    DualDescent,
    /// `p(t+1) = p(t) − η·excess`. Prices fall under excess demand, so the
    /// iteration moves away from the optimum.
    #[serde(rename = "paper-literal")]
    Reversed,
}

/// Supplier-side state: the current price and how to move it.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceCoordinator {
    price: Vec<f64>,
    eta: f64,
    sign: SignConvention,
}

impl PriceCoordinator {
    pub fn new(initial_price: Vec<f64>, eta: f64, sign: SignConvention) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("must be positive and finite, got {eta}")));
        }
        Ok(PriceCoordinator {
            price: initial_price,
            eta,
            sign,
        })
    }

    pub fn broadcast(&self) -> &[f64] {
        &self.price
    }

    /// Move the price given the metered excess `Σ_i q_i − Q`.
    pub fn update(&mut self, excess: &[f64]) {
        let k = match self.sign {
            SignConvention::DualDescent => self.eta,
            SignConvention::Reversed => -self.eta,
        };
        for (p, e) in self.price.iter_mut().zip(excess) {
            *p += k * e;
        }
    }
}

/// Every user's local demand at the broadcast price.
pub fn respond<U: Utility>(users: &[U], price: &[f64]) -> Vec<Vec<f64>> {
    users.iter().map(|u| local_demand(u, price)).collect()
}

/// As [`respond`], solving users on the rayon pool. Results are identical.
pub fn respond_parallel<U: Utility + Sync>(users: &[U], price: &[f64]) -> Vec<Vec<f64>> {
    users.par_iter().map(|u| local_demand(u, price)).collect()
}

/// Aggregate allocation minus capacity.
pub fn measure_excess(allocations: &[Vec<f64>], capacity: &[f64]) -> Vec<f64> {
    vector::sub(&vector::sum_columns(allocations, capacity.len()), capacity)
}

/// One step of the online loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineState {
    pub t: usize,
    /// Price broadcast at step `t`.
    pub price: Vec<f64>,
    /// One allocation vector per user, each the local demand at `price`.
    pub allocations: Vec<Vec<f64>>,
    /// `Σ_i q_i(t) − Q(t)`.
    pub excess: Vec<f64>,
    /// Price after the update, broadcast at step `t + 1`.
    pub next_price: Vec<f64>,
}

pub fn od3_step<U: Utility>(
    t: usize,
    price: &[f64],
    users: &[U],
    capacity: &[f64],
    eta: f64,
    sign: SignConvention,
) -> Result<OnlineState> {
    let mut coordinator = PriceCoordinator::new(price.to_vec(), eta, sign)?;
    let allocations = respond(users, coordinator.broadcast());
    Ok(finish_step(t, &mut coordinator, allocations, capacity))
}

fn finish_step(t: usize, coordinator: &mut PriceCoordinator, allocations: Vec<Vec<f64>>, capacity: &[f64]) -> OnlineState {
    let price = coordinator.broadcast().to_vec();
    let excess = measure_excess(&allocations, capacity);
    coordinator.update(&excess);
    OnlineState {
        t,
        price,
        allocations,
        excess,
        next_price: coordinator.broadcast().to_vec(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Od3Options {
    pub sign: SignConvention,
    /// Solve the users of a step on the rayon pool.
    pub parallel: bool,
}

/// Online trajectory over a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<OnlineState>,
    pub eta: f64,
    pub sign: SignConvention,
}

impl Trajectory {
    pub fn initial_price(&self) -> &[f64] {
        &self.states[0].price
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Run the loop over `trace` with utilities `[t][i]`, starting from `p0`.
pub fn run_od3<U: Utility + Sync>(
    trace: &SystemTrace,
    utilities: &[Vec<U>],
    params: &GlobalParams,
    p0: &[f64],
    options: Od3Options,
) -> Result<Trajectory> {
    let horizon = trace.horizon();
    if horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    if utilities.len() != horizon {
        return Err(Error::DimensionMismatch {
            context: "utility series length vs trace horizon",
            expected: horizon,
            actual: utilities.len(),
        });
    }
    let r = trace.n_suppliers();
    if p0.len() != r {
        return Err(Error::DimensionMismatch {
            context: "initial price",
            expected: r,
            actual: p0.len(),
        });
    }
    let n = utilities[0].len();
    let mut coordinator = PriceCoordinator::new(p0.to_vec(), params.eta, options.sign)?;
    let mut states = Vec::with_capacity(horizon);
    for (t, (users, capacity)) in utilities.iter().zip(&trace.capacities).enumerate() {
        if users.len() != n {
            return Err(Error::DimensionMismatch {
                context: "users per step",
                expected: n,
                actual: users.len(),
            });
        }
        if let Some(bad) = users.iter().find(|u| u.dim() != r) {
            return Err(Error::DimensionMismatch {
                context: "utility dimension vs suppliers",
                expected: r,
                actual: bad.dim(),
            });
        }
        let allocations = if options.parallel {
            respond_parallel(users, coordinator.broadcast())
        } else {
            respond(users, coordinator.broadcast())
        };
        states.push(finish_step(t, &mut coordinator, allocations, capacity));
    }
    Ok(Trajectory {
        states,
        eta: params.eta,
        sign: options.sign,
    })
}
