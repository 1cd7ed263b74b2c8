//! The online loop talks to users only through the broadcast price and to
//! the coordinator only through the measured excess.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use od3::model::BoundingBox;
use od3::{derive_global_params, run_od3, vector, Od3Options, SignConvention, SystemTrace, Utility};

/// Unit quadratic that records every price it is asked to respond to and
/// refuses any other query during the run.
struct Spy {
    target: Vec<f64>,
    seen: Mutex<Vec<Vec<f64>>>,
    armed: AtomicBool,
}

impl Spy {
    fn new(target: f64) -> Self {
        Spy {
            target: vec![target],
            seen: Mutex::new(Vec::new()),
            armed: AtomicBool::new(false),
        }
    }

    fn forbid(&self, what: &str) {
        assert!(!self.armed.load(Ordering::SeqCst), "online loop queried `{what}` on a user");
    }
}

impl Utility for Spy {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, q: &[f64]) -> f64 {
        self.forbid("value");
        -(q[0] - self.target[0]).powi(2)
    }

    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        self.forbid("gradient");
        vec![-2.0 * (q[0] - self.target[0])]
    }

    fn sigma(&self) -> f64 {
        2.0
    }

    fn lipschitz_grad(&self) -> f64 {
        2.0
    }

    fn lipschitz_value_on(&self, domain: &BoundingBox) -> f64 {
        2.0 * domain.farthest_distance(&self.target)
    }

    fn gradient_drift_to(&self, next: &Self) -> f64 {
        2.0 * vector::distance(&self.target, &next.target)
    }

    fn inverse_gradient(&self, p: &[f64]) -> Vec<f64> {
        self.seen.lock().unwrap().push(p.to_vec());
        vec![self.target[0] - p[0] / 2.0]
    }
}

#[test]
fn users_see_only_the_broadcast_price() {
    let horizon = 6;
    let capacities: Vec<Vec<f64>> = (0..horizon).map(|t| vec![4.0 + 0.1 * t as f64]).collect();
    let trace = SystemTrace::with_static_targets(capacities.clone(), vec![vec![3.0], vec![5.0]], vec![1.0, 1.0]).unwrap();
    let utilities: Vec<Vec<Spy>> = (0..horizon).map(|_| vec![Spy::new(3.0), Spy::new(5.0)]).collect();
    let params = derive_global_params(&utilities, &trace).unwrap().with_eta(0.3);
    for u in utilities.iter().flatten() {
        u.seen.lock().unwrap().clear();
        u.armed.store(true, Ordering::SeqCst);
    }

    let traj = run_od3(&trace, &utilities, &params, &[0.5], Od3Options::default()).unwrap();

    for (t, (state, users)) in traj.states.iter().zip(&utilities).enumerate() {
        for (i, u) in users.iter().enumerate() {
            let seen = u.seen.lock().unwrap();
            assert_eq!(seen.len(), 1, "user {i} at step {t} answered {} queries", seen.len());
            assert_eq!(seen[0], state.price);
        }
        let total: f64 = state.allocations.iter().map(|q| q[0]).sum();
        assert_eq!(state.excess, vec![total - capacities[t][0]]);
        assert_eq!(state.next_price, vec![state.price[0] + 0.3 * state.excess[0]]);
        if t + 1 < traj.len() {
            assert_eq!(traj.states[t + 1].price, state.next_price);
        }
    }
}

#[test]
fn reversed_update_moves_against_the_excess() {
    let trace = SystemTrace::with_static_targets(vec![vec![4.0]; 3], vec![vec![3.0], vec![5.0]], vec![1.0, 1.0]).unwrap();
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace).unwrap().with_eta(0.25);
    let opts = Od3Options { sign: SignConvention::Reversed, ..Default::default() };
    let traj = run_od3(&trace, &utilities, &params, &[1.0], opts).unwrap();
    for s in &traj.states {
        assert_eq!(s.next_price[0], s.price[0] - 0.25 * s.excess[0]);
    }
}
