mod common;

use od3::model::{numeric_inverse_gradient, Dimensions};
use od3::roots::Tolerance;
use od3::{
    derive_global_params, local_demand, oracle, run_od3, synth_trace, validate_trace, vector, Od3Options, QuadraticUtility,
    SystemTrace, TraceSynthesis, Utility,
};
use proptest::prelude::*;

fn quadratic(r: usize) -> impl Strategy<Value = QuadraticUtility> {
    (prop::collection::vec(-10.0..10.0f64, r), 0.1..5.0f64).prop_map(|(s, k)| QuadraticUtility::new(s, k).unwrap())
}

fn point(r: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, r)
}

proptest! {
    #[test]
    fn gradient_is_strongly_monotone_and_lipschitz(
        (u, a, b) in (1usize..4).prop_flat_map(|r| (quadratic(r), point(r), point(r)))
    ) {
        let d = vector::sub(&a, &b);
        let gd = vector::sub(&u.gradient(&a), &u.gradient(&b));
        let dd = vector::dot(&d, &d);
        prop_assert!(vector::dot(&gd, &d) <= -u.sigma() * dd + 1e-9 * (1.0 + dd));
        prop_assert!(vector::norm(&gd) <= u.lipschitz_grad() * vector::norm(&d) + 1e-9);
    }

    #[test]
    fn inverse_gradient_round_trips(
        (u, p) in (1usize..4).prop_flat_map(|r| (quadratic(r), point(r)))
    ) {
        let q = u.inverse_gradient(&p);
        prop_assert!(vector::distance(&u.gradient(&q), &p) <= 1e-10 * (1.0 + vector::norm(&p)));
        let numeric = numeric_inverse_gradient(&u, &p, &Tolerance::default()).unwrap();
        prop_assert!(vector::distance(&numeric, &q) <= 1e-9 * (1.0 + vector::norm(&q)));
    }

    #[test]
    fn demand_falls_as_price_rises(
        (u, p1, p2) in (1usize..4).prop_flat_map(|r| (quadratic(r), point(r), point(r)))
    ) {
        let dq = vector::sub(&local_demand(&u, &p1), &local_demand(&u, &p2));
        let dp = vector::sub(&p1, &p2);
        prop_assert!(vector::dot(&dq, &dp) <= 1e-9);
    }

    #[test]
    fn synthesized_traces_respect_their_bounds(
        n in 1usize..6, r in 1usize..4, gamma in 0.0..2.0f64, alpha in 0.0..2.0f64, seed in any::<u64>(),
        scales in prop::collection::vec(0.2..3.0f64, 6)
    ) {
        let trace = synth_trace(&TraceSynthesis {
            dims: Dimensions { n_users: n, n_suppliers: r },
            horizon: 30,
            gamma,
            alpha,
            seed,
            base_capacity: vec![5.0; r],
            base_targets: vec![vec![1.0; r]; n],
            scales: Some(scales[..n].to_vec()),
        }).unwrap();
        prop_assert!(validate_trace(&trace, gamma, alpha).passed());
        let params = derive_global_params(&trace.quadratic_utilities(), &trace).unwrap();
        prop_assert_eq!(params.gamma, gamma);
        prop_assert_eq!(params.alpha, alpha);
    }

    #[test]
    fn parallel_and_sequential_runs_agree(seed in any::<u64>(), n in 1usize..20) {
        let trace = synth_trace(&TraceSynthesis {
            dims: Dimensions { n_users: n, n_suppliers: 2 },
            horizon: 20,
            gamma: 0.3,
            alpha: 0.3,
            seed,
            base_capacity: vec![5.0, 3.0],
            base_targets: vec![vec![1.0, 0.5]; n],
            scales: None,
        }).unwrap();
        let utilities = trace.quadratic_utilities();
        let params = derive_global_params(&utilities, &trace).unwrap();
        let seq = run_od3(&trace, &utilities, &params, &[0.0, 0.0], Od3Options::default()).unwrap();
        let par = run_od3(&trace, &utilities, &params, &[0.0, 0.0], Od3Options { parallel: true, ..Default::default() }).unwrap();
        prop_assert_eq!(seq, par);
    }

    /// With nothing drifting and a proven-range step size the price error never grows.
    #[test]
    fn static_price_error_is_monotone(
        targets in prop::collection::vec(-3.0..3.0f64, 1..8),
        scales in prop::collection::vec(0.3..3.0f64, 8),
        capacity in -5.0..10.0f64,
        p0 in -30.0..30.0f64,
        fraction in 0.05..1.0f64,
    ) {
        let n = targets.len();
        let trace = SystemTrace::with_static_targets(
            vec![vec![capacity]; 40],
            targets.iter().map(|s| vec![*s]).collect(),
            scales[..n].to_vec(),
        ).unwrap();
        let utilities = trace.quadratic_utilities();
        let params = derive_global_params(&utilities, &trace).unwrap();
        let params = params.clone().with_eta(fraction * params.proven_eta_max());
        let p_star = oracle::solve_step(&utilities[0], &[capacity]).unwrap().price_opt[0];
        let traj = run_od3(&trace, &utilities, &params, &[p0], Od3Options::default()).unwrap();
        let errors: Vec<f64> = traj.states.iter().map(|s| (s.price[0] - p_star).abs()).collect();
        for w in errors.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0]));
        }
    }

    /// The closed-form optimum is feasible, stationary and dual-tight.
    #[test]
    fn oracle_optimum_is_kkt_point(
        n in 1usize..6, r in 1usize..4,
        raw in prop::collection::vec((-5.0..5.0f64, 0.2..4.0f64), 6 * 3),
        capacity in prop::collection::vec(-5.0..15.0f64, 3),
    ) {
        let users: Vec<QuadraticUtility> = (0..n)
            .map(|i| QuadraticUtility::new((0..r).map(|j| raw[i * 3 + j].0).collect(), raw[i * 3].1).unwrap())
            .collect();
        let cap = &capacity[..r];
        let sol = oracle::solve_step(&users, cap).unwrap();
        let total = vector::sum_columns(&sol.allocations_opt, r);
        prop_assert!(common::distance(&total, cap) <= 1e-9 * (1.0 + common::norm(cap)));
        for (u, q) in users.iter().zip(&sol.allocations_opt) {
            prop_assert!(common::distance(&u.gradient(q), &sol.price_opt) <= 1e-9 * (1.0 + common::norm(&sol.price_opt)));
        }
        let dual = oracle::dual_value(&users, cap, &sol.price_opt);
        prop_assert!((dual - sol.welfare_opt).abs() <= 1e-8 * (1.0 + sol.welfare_opt.abs()));
    }
}
