//! Tracking envelopes on a trace where the drift is worst-case every step.
//!
//! One unit-scale user, capacity rising by `γ` per step, step size at the
//! proven maximum, warm start. The optimal price falls by exactly `b` each
//! step and the dual step contracts by exactly `c`, so the price error obeys
//! `e(t+1) = c·e(t) + b` with equality.

use od3::bounds::{self, BoundId};
use od3::{derive_global_params, oracle, run_od3, GlobalParams, Od3Options, OracleSolution, SystemTrace, Trajectory};

const GAMMA: f64 = 0.1;

fn ramp() -> (Trajectory, Vec<OracleSolution>, GlobalParams) {
    let trace = SystemTrace::with_static_targets((0..60).map(|t| vec![5.0 + GAMMA * t as f64]).collect(), vec![vec![10.0]], vec![1.0]).unwrap();
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace).unwrap();
    let p0 = oracle::aggregate_inverse(&utilities[0], &trace.capacities[0]).unwrap();
    let traj = run_od3(&trace, &utilities, &params, &p0, Od3Options::default()).unwrap();
    let opt = oracle::solve_trace(&utilities, &trace.capacities).unwrap();
    (traj, opt, params)
}

#[test]
fn ramp_constants() {
    let (_, _, params) = ramp();
    // σ = L = 2, N = 1: η = 2·2/(1·5), c² = 1 − 2·0.8·2/5, b = 4·γ/2.
    assert!((params.eta - 0.8).abs() < 1e-15);
    assert!((params.contraction_factor() - 0.6).abs() < 1e-15);
    assert!((params.drift_constant() - 2.0 * GAMMA).abs() < 1e-12);
}

#[test]
fn price_error_follows_the_recursion_with_equality() {
    let (traj, opt, params) = ramp();
    let (b, c) = (params.drift_constant(), params.contraction_factor());
    let mut expected = 0.0;
    for (s, o) in traj.states.iter().zip(&opt) {
        let e = (s.price[0] - o.price_opt[0]).abs();
        assert!((e - expected).abs() < 1e-12, "t={} e={e} expected={expected}", s.t);
        expected = c * expected + b;
    }
}

#[test]
fn accumulated_envelopes_hold_and_are_tight() {
    let (traj, opt, params) = ramp();
    let rows = bounds::cert_primal_tracking(&traj, &opt, &params).unwrap();
    for r in rows.iter().filter(|r| r.bound == BoundId::PrimalTrackingAccumulated) {
        assert!(r.pass, "{r:?}");
        assert!(r.slack.abs() < 1e-12);
    }
    let rows = bounds::cert_dual_tracking(&traj, &opt, &params).unwrap();
    for r in rows.iter().filter(|r| r.bound == BoundId::DualTrackingAccumulated) {
        assert!(r.pass && r.slack.abs() < 1e-12, "{r:?}");
    }
}

/// The quoted primal envelope allows `b/σ` once the transient is gone while
/// the error settles at `b/(σ(1−c))`.
#[test]
fn quoted_primal_envelope_is_exceeded_by_the_accumulation_factor() {
    let (traj, opt, params) = ramp();
    let rows = bounds::cert_primal_tracking(&traj, &opt, &params).unwrap();
    let last = rows.iter().rfind(|r| r.bound == BoundId::PrimalTracking).unwrap();
    assert!(!last.pass);
    let c = params.contraction_factor();
    assert!((last.lhs / last.rhs - 1.0 / (1.0 - c)).abs() < 1e-9);
}

/// From a warm start the quoted dual envelope at `t = 0` is `e(0) = 0`,
/// below the first error `b`.
#[test]
fn quoted_dual_envelope_misses_the_first_step_from_warm_start() {
    let (traj, opt, params) = ramp();
    let rows = bounds::cert_dual_tracking(&traj, &opt, &params).unwrap();
    let first = rows.iter().find(|r| r.t == 0 && r.bound == BoundId::DualTracking).unwrap();
    assert_eq!(first.rhs, 0.0);
    assert!((first.lhs - params.drift_constant()).abs() < 1e-12);
    assert!(!first.pass);
}

#[test]
fn constraint_envelope_holds_with_equality() {
    let (traj, opt, params) = ramp();
    let rows = bounds::cert_constraint_violation(&traj, &opt, &params).unwrap();
    for r in &rows {
        assert!(r.pass, "{r:?}");
    }
    let tight = rows.iter().filter(|r| r.bound == BoundId::ConstraintViolationEnvelope).all(|r| r.slack.abs() < 1e-12);
    assert!(tight);
}
