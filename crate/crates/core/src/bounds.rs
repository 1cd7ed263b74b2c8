//! Certificates: every guarantee of the online loop, evaluated along a run.
//!
//! Each certificate produces [`BoundRow`]s comparing a measured left-hand
//! side against the bound's right-hand side at one step (and, for per-user
//! bounds, one user). A row passes when `lhs ≤ rhs + 1e-9·(1 + |rhs|)`.
//!
//! Bounds whose proof relies on the contraction of the dual step only hold
//! for `η ≤ 2L/(N(1+Lσ))` under [`SignConvention::DualDescent`]. Outside that
//! regime their rows are still computed but flagged (`in_regime = false`)
//! rather than counted as failures.
//!
//! The tracking envelopes come in two forms. The quoted form carries the
//! transient as `c^t` and the drift as a single `b`-sized term. The
//! accumulated form follows the one-step recursion
//! `e(t+1) ≤ c·e(t) + b` exactly, giving `b/(1−c) + c^{t+1}(e(0) − b/(1−c))`.
//! Both are reported; the accumulated forms are marked as reference rows.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundingBox, GlobalParams, Utility};
use crate::od3::{SignConvention, Trajectory};
use crate::oracle::{self, DualCurvature, OracleSolution};
use crate::vector;

/// Which inequality a row certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    /// `‖p*(t) − p*(t+1)‖ ≤ (L²/σ)(γ/N + α/σ)`.
    PriceVolatility,
    /// `‖q_i*(t+1) − q_i*(t)‖ ≤ (L²/σ²)(γ/N + α/σ) + α/σ`.
    PrimalVolatility,
    /// `‖p(t+1) − p*(t+1)‖ ≤ b/(1−c) + c^t(‖p(0) − p*(0)‖ − b/(1−c))`.
    DualTracking,
    /// Same with `c^{t+1}`, the exact solution of the one-step recursion.
    DualTrackingAccumulated,
    /// Largest dual error once the transient has decayed, against `b/(1−c)`.
    DualTrackingFloor,
    /// `‖q_i(t+1) − q_i*(t+1)‖ ≤ (c^t/σ)‖p(0) − p*(0)‖ + (L²/σ²)(γ/N + α/σ)`.
    PrimalTracking,
    /// `‖q_i(t+1) − q_i*(t+1)‖ ≤ (1/σ)·[b/(1−c) + c^{t+1}(e(0) − b/(1−c))]`.
    PrimalTrackingAccumulated,
    /// `|Σ U_i(q_i(t)) − Σ U_i(q_i*(t))| ≤ N·L′·[(c^t/σ)e(0) + (L²/σ²)(γ/N + α/σ)]`.
    WelfareGap,
    /// `|…| ≤ N·L′·(1/σ)·[b/(1−c) + c^t(e(0) − b/(1−c))]`.
    WelfareGapAccumulated,
    /// `‖Σ q_i(t) − Q(t)‖ ≤ (N/σ)‖p(t) − p*(t)‖`.
    ConstraintViolation,
    /// `‖Σ q_i(t) − Q(t)‖ ≤ (N/σ)·[b/(1−c) + c^t(e(0) − b/(1−c))]`.
    ConstraintViolationEnvelope,
    /// `‖[∇U_i^t]^{-1}(p) − [∇U_i^{t+1}]^{-1}(p)‖ ≤ α/σ`.
    InverseGradientDrift,
    /// `‖Γ_t^{-1}(Q) − Γ_{t+1}^{-1}(Q)‖ ≤ αL²/σ²`.
    AggregateInverseDrift,
    /// `‖p*(t) − (p − η∇D_t(p))‖² ≤ c²‖p*(t) − p‖²`.
    Contraction,
    /// `Nσ/L² ≤` measured strong convexity of `D_t`.
    DualStrongConvexity,
    /// Measured gradient-Lipschitz constant of `D_t` `≤ N/σ`.
    DualSmoothness,
    /// `N/L ≤` measured strong convexity (quoted constant, reference only).
    QuotedDualStrongConvexity,
    /// Measured gradient-Lipschitz constant `≤ Nσ` (quoted constant, reference only).
    QuotedDualSmoothness,
}

impl BoundId {
    pub const ALL: [BoundId; 18] = [
        BoundId::PriceVolatility,
        BoundId::PrimalVolatility,
        BoundId::DualTracking,
        BoundId::DualTrackingAccumulated,
        BoundId::DualTrackingFloor,
        BoundId::PrimalTracking,
        BoundId::PrimalTrackingAccumulated,
        BoundId::WelfareGap,
        BoundId::WelfareGapAccumulated,
        BoundId::ConstraintViolation,
        BoundId::ConstraintViolationEnvelope,
        BoundId::InverseGradientDrift,
        BoundId::AggregateInverseDrift,
        BoundId::Contraction,
        BoundId::DualStrongConvexity,
        BoundId::DualSmoothness,
        BoundId::QuotedDualStrongConvexity,
        BoundId::QuotedDualSmoothness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::PriceVolatility => "price_volatility",
            BoundId::PrimalVolatility => "primal_volatility",
            BoundId::DualTracking => "dual_tracking",
            BoundId::DualTrackingAccumulated => "dual_tracking_accumulated",
            BoundId::DualTrackingFloor => "dual_tracking_floor",
            BoundId::PrimalTracking => "primal_tracking",
            BoundId::PrimalTrackingAccumulated => "primal_tracking_accumulated",
            BoundId::WelfareGap => "welfare_gap",
            BoundId::WelfareGapAccumulated => "welfare_gap_accumulated",
            BoundId::ConstraintViolation => "constraint_violation",
            BoundId::ConstraintViolationEnvelope => "constraint_violation_envelope",
            BoundId::InverseGradientDrift => "inverse_gradient_drift",
            BoundId::AggregateInverseDrift => "aggregate_inverse_drift",
            BoundId::Contraction => "contraction",
            BoundId::DualStrongConvexity => "dual_strong_convexity",
            BoundId::DualSmoothness => "dual_smoothness",
            BoundId::QuotedDualStrongConvexity => "quoted_dual_strong_convexity",
            BoundId::QuotedDualSmoothness => "quoted_dual_smoothness",
        }
    }

    /// Reference rows are reported but do not decide whether a run is certified.
    pub fn is_reference(self) -> bool {
        matches!(
            self,
            BoundId::DualTrackingAccumulated
                | BoundId::PrimalTrackingAccumulated
                | BoundId::WelfareGapAccumulated
                | BoundId::QuotedDualStrongConvexity
                | BoundId::QuotedDualSmoothness
        )
    }
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Absolute and relative slack granted to every comparison.
pub const CERT_TOLERANCE: f64 = 1e-9;

pub fn within_bound(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + CERT_TOLERANCE * (1.0 + rhs.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: usize,
    pub bound: BoundId,
    pub user: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub pass: bool,
    /// False when the bound's hypotheses (step size, sign) are not met.
    pub in_regime: bool,
}

impl BoundRow {
    pub fn new(t: usize, bound: BoundId, user: Option<usize>, lhs: f64, rhs: f64, in_regime: bool) -> Self {
        BoundRow {
            t,
            bound,
            user,
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: within_bound(lhs, rhs),
            in_regime,
        }
    }

    /// Passed, or not applicable because the run is out of regime.
    pub fn certified(&self) -> bool {
        self.pass || !self.in_regime
    }
}

/// Per-bound aggregate of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub rows: usize,
    /// Rows outside the proven regime; excluded from `pass_rate`.
    pub flagged: usize,
    pub passed: usize,
    pub pass_rate: Option<f64>,
    pub worst_slack: Option<f64>,
    pub argmin_step: Option<usize>,
    pub argmin_user: Option<usize>,
    pub reference: bool,
}

impl BoundSummary {
    fn from_rows<'a>(bound: BoundId, rows: impl Iterator<Item = &'a BoundRow>) -> Self {
        let mut s = BoundSummary {
            rows: 0,
            flagged: 0,
            passed: 0,
            pass_rate: None,
            worst_slack: None,
            argmin_step: None,
            argmin_user: None,
            reference: bound.is_reference(),
        };
        for row in rows {
            s.absorb(row);
        }
        s.finish();
        s
    }

    fn absorb(&mut self, row: &BoundRow) {
        self.rows += 1;
        if !row.in_regime {
            self.flagged += 1;
            return;
        }
        if row.pass {
            self.passed += 1;
        }
        let slack = if row.slack.is_nan() { f64::NEG_INFINITY } else { row.slack };
        if self.worst_slack.is_none_or(|w| slack < w) {
            self.worst_slack = Some(slack);
            self.argmin_step = Some(row.t);
            self.argmin_user = row.user;
        }
    }

    fn finish(&mut self) {
        let checked = self.rows - self.flagged;
        self.pass_rate = (checked > 0).then(|| self.passed as f64 / checked as f64);
    }

    /// Merge summaries of the same bound from different runs.
    pub fn merge(&mut self, other: &BoundSummary) {
        self.rows += other.rows;
        self.flagged += other.flagged;
        self.passed += other.passed;
        if let Some(w) = other.worst_slack {
            if self.worst_slack.is_none_or(|mine| w < mine) {
                self.worst_slack = Some(w);
                self.argmin_step = other.argmin_step;
                self.argmin_user = other.argmin_user;
            }
        }
        self.finish();
    }

    pub fn all_passed(&self) -> bool {
        self.passed + self.flagged == self.rows
    }
}

/// Certificate rows of one run plus the constants they were evaluated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Contraction factor `c`.
    pub c: f64,
    /// Drift constant `b`.
    pub b: f64,
    /// Welfare-gap bound once the transient has vanished, `N·L′·(L²/σ²)(γ/N + α/σ)`.
    pub welfare_floor: Option<f64>,
    pub eta: f64,
    pub eta_in_proven_range: bool,
    pub sign: SignConvention,
    pub lipschitz_value: Option<f64>,
    pub lprime_domain: Option<BoundingBox>,
    pub curvature: Vec<DualCurvature>,
}

impl BoundReport {
    pub fn rows_for(&self, bound: BoundId) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(move |r| r.bound == bound)
    }

    pub fn summary(&self) -> BTreeMap<BoundId, BoundSummary> {
        let mut out = BTreeMap::new();
        for bound in BoundId::ALL {
            if self.rows.iter().any(|r| r.bound == bound) {
                out.insert(bound, BoundSummary::from_rows(bound, self.rows_for(bound)));
            }
        }
        out
    }

    /// Every non-reference row either passed or was flagged out of regime.
    pub fn all_certified(&self) -> bool {
        self.rows.iter().filter(|r| !r.bound.is_reference()).all(BoundRow::certified)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(|r| !r.certified())
    }

    /// One CSV row per step per bound.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "bound", "user", "lhs", "rhs", "slack", "pass", "in_regime"])?;
        for r in &self.rows {
            w.write_record([
                r.t.to_string(),
                r.bound.name().to_string(),
                r.user.map(|u| u.to_string()).unwrap_or_default(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.slack.to_string(),
                r.pass.to_string(),
                r.in_regime.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("bounds csv", e))?;
        Ok(())
    }
}

/// Whether the contraction-based bounds apply to this run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regime {
    pub eta_in_range: bool,
    pub dual_descent: bool,
}

impl Regime {
    pub fn of(params: &GlobalParams, sign: SignConvention) -> Self {
        Regime {
            eta_in_range: params.eta_in_proven_range(),
            dual_descent: sign == SignConvention::DualDescent,
        }
    }

    pub fn tracking(self) -> bool {
        self.eta_in_range && self.dual_descent
    }
}

/// `b/(1−c) + c^k (e0 − b/(1−c))`.
fn envelope(b: f64, c: f64, e0: f64, k: i32) -> f64 {
    let floor = b / (1.0 - c);
    floor + c.powi(k) * (e0 - floor)
}

fn check_lengths(online: &Trajectory, oracle: &[OracleSolution]) -> Result<()> {
    if online.len() != oracle.len() {
        return Err(Error::DimensionMismatch {
            context: "online trajectory vs oracle trajectory",
            expected: oracle.len(),
            actual: online.len(),
        });
    }
    if online.is_empty() {
        return Err(Error::EmptyHorizon);
    }
    Ok(())
}

fn initial_error(online: &Trajectory, oracle: &[OracleSolution]) -> f64 {
    vector::distance(&online.states[0].price, &oracle[0].price_opt)
}

/// Optimal-price volatility between consecutive steps.
pub fn cert_price_volatility(oracle: &[OracleSolution], params: &GlobalParams) -> Vec<BoundRow> {
    let rhs = params.price_volatility_bound();
    oracle
        .windows(2)
        .enumerate()
        .map(|(t, w)| {
            let lhs = vector::distance(&w[0].price_opt, &w[1].price_opt);
            BoundRow::new(t, BoundId::PriceVolatility, None, lhs, rhs, true)
        })
        .collect()
}

/// Optimal-allocation volatility between consecutive steps, per user.
pub fn cert_primal_volatility(oracle: &[OracleSolution], params: &GlobalParams) -> Vec<BoundRow> {
    let rhs = params.primal_volatility_bound();
    let mut rows = Vec::new();
    for (t, w) in oracle.windows(2).enumerate() {
        for (i, (a, b)) in w[0].allocations_opt.iter().zip(&w[1].allocations_opt).enumerate() {
            rows.push(BoundRow::new(t, BoundId::PrimalVolatility, Some(i), vector::distance(b, a), rhs, true));
        }
    }
    rows
}

/// Dual tracking error `‖p(t+1) − p*(t+1)‖` against its envelopes, plus the
/// long-run floor `b/(1−c)`.
pub fn cert_dual_tracking(online: &Trajectory, oracle: &[OracleSolution], params: &GlobalParams) -> Result<Vec<BoundRow>> {
    check_lengths(online, oracle)?;
    let regime = Regime::of(params, online.sign).tracking();
    let (b, c) = (params.drift_constant(), params.contraction_factor());
    let e0 = initial_error(online, oracle);
    let errors: Vec<f64> = online
        .states
        .iter()
        .zip(oracle)
        .map(|(s, o)| vector::distance(&s.price, &o.price_opt))
        .collect();
    let mut rows = Vec::new();
    for t in 0..errors.len().saturating_sub(1) {
        let lhs = errors[t + 1];
        rows.push(BoundRow::new(t, BoundId::DualTracking, None, lhs, envelope(b, c, e0, t as i32), regime));
        rows.push(BoundRow::new(t, BoundId::DualTrackingAccumulated, None, lhs, envelope(b, c, e0, t as i32 + 1), regime));
    }
    if let Some(row) = floor_row(&errors, b, c, e0, regime) {
        rows.push(row);
    }
    Ok(rows)
}

/// The floor is checked over the steps whose transient `c^t·(e0 − b/(1−c))⁺`
/// has dropped below `1e-12·(1 + b/(1−c))`.
fn floor_row(errors: &[f64], b: f64, c: f64, e0: f64, regime: bool) -> Option<BoundRow> {
    if !(c.is_finite() && c < 1.0) {
        return None;
    }
    let floor = b / (1.0 - c);
    let excess = (e0 - floor).max(0.0);
    let start = (0..errors.len()).find(|&t| c.powi(t as i32) * excess <= 1e-12 * (1.0 + floor))?;
    let (t, lhs) = errors[start..]
        .iter()
        .enumerate()
        .fold((start, f64::NEG_INFINITY), |best, (k, &e)| if e > best.1 { (start + k, e) } else { best });
    Some(BoundRow::new(t, BoundId::DualTrackingFloor, None, lhs, floor, regime))
}

/// Primal tracking error `‖q_i(t+1) − q_i*(t+1)‖`, per user.
pub fn cert_primal_tracking(online: &Trajectory, oracle: &[OracleSolution], params: &GlobalParams) -> Result<Vec<BoundRow>> {
    check_lengths(online, oracle)?;
    let regime = Regime::of(params, online.sign).tracking();
    let (b, c, sigma) = (params.drift_constant(), params.contraction_factor(), params.sigma);
    let e0 = initial_error(online, oracle);
    let drift = params.primal_drift_term();
    let mut rows = Vec::new();
    for t in 0..online.len().saturating_sub(1) {
        let quoted = c.powi(t as i32) / sigma * e0 + drift;
        let accumulated = envelope(b, c, e0, t as i32 + 1) / sigma;
        let (state, opt) = (&online.states[t + 1], &oracle[t + 1]);
        for (i, (q, qs)) in state.allocations.iter().zip(&opt.allocations_opt).enumerate() {
            let lhs = vector::distance(q, qs);
            rows.push(BoundRow::new(t, BoundId::PrimalTracking, Some(i), lhs, quoted, regime));
            rows.push(BoundRow::new(t, BoundId::PrimalTrackingAccumulated, Some(i), lhs, accumulated, regime));
        }
    }
    Ok(rows)
}

/// Smallest box containing every online and optimal allocation, inflated by 10%.
pub fn allocation_domain(online: &Trajectory, oracle: &[OracleSolution]) -> Option<BoundingBox> {
    let points = online
        .states
        .iter()
        .flat_map(|s| s.allocations.iter())
        .chain(oracle.iter().flat_map(|o| o.allocations_opt.iter()))
        .map(Vec::as_slice);
    BoundingBox::from_points(points).map(|b| b.inflated(0.1))
}

/// `L′ = max_{i,t}` value-Lipschitz constant of `U_i^t` over `domain`.
pub fn value_lipschitz<U: Utility>(utilities: &[Vec<U>], domain: &BoundingBox) -> f64 {
    utilities
        .iter()
        .flatten()
        .map(|u| u.lipschitz_value_on(domain))
        .fold(0.0, f64::max)
}

/// Gap between online and optimal welfare at each step.
pub fn cert_welfare_gap<U: Utility>(
    online: &Trajectory,
    oracle: &[OracleSolution],
    utilities: &[Vec<U>],
    params: &GlobalParams,
    lprime: f64,
) -> Result<Vec<BoundRow>> {
    check_lengths(online, oracle)?;
    let regime = Regime::of(params, online.sign).tracking();
    let (b, c, sigma) = (params.drift_constant(), params.contraction_factor(), params.sigma);
    let n = params.n_users as f64;
    let e0 = initial_error(online, oracle);
    let drift = params.primal_drift_term();
    let mut rows = Vec::with_capacity(2 * online.len());
    for (t, (state, opt)) in online.states.iter().zip(oracle).enumerate() {
        let online_welfare = oracle::welfare(&utilities[t], &state.allocations);
        let lhs = (online_welfare - opt.welfare_opt).abs();
        let quoted = n * lprime * (c.powi(t as i32) / sigma * e0 + drift);
        let accumulated = n * lprime * envelope(b, c, e0, t as i32) / sigma;
        rows.push(BoundRow::new(t, BoundId::WelfareGap, None, lhs, quoted, regime));
        rows.push(BoundRow::new(t, BoundId::WelfareGapAccumulated, None, lhs, accumulated, regime));
    }
    Ok(rows)
}

/// Constraint violation `‖Σ q_i(t) − Q(t)‖` against the measured-price bound
/// and against the closed-form envelope.
pub fn cert_constraint_violation(online: &Trajectory, oracle: &[OracleSolution], params: &GlobalParams) -> Result<Vec<BoundRow>> {
    check_lengths(online, oracle)?;
    let regime = Regime::of(params, online.sign).tracking();
    let (b, c) = (params.drift_constant(), params.contraction_factor());
    let k = params.n_users as f64 / params.sigma;
    let e0 = initial_error(online, oracle);
    let mut rows = Vec::with_capacity(2 * online.len());
    for (t, (state, opt)) in online.states.iter().zip(oracle).enumerate() {
        let lhs = vector::norm(&state.excess);
        let measured = k * vector::distance(&state.price, &opt.price_opt);
        rows.push(BoundRow::new(t, BoundId::ConstraintViolation, None, lhs, measured, true));
        rows.push(BoundRow::new(
            t,
            BoundId::ConstraintViolationEnvelope,
            None,
            lhs,
            k * envelope(b, c, e0, t as i32),
            regime,
        ));
    }
    Ok(rows)
}

fn random_offset<G: Rng>(center: &[f64], radius: f64, rng: &mut G) -> Vec<f64> {
    center.iter().map(|x| x + radius * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Drift of individual and aggregate inverse gradients between consecutive
/// steps, probed at random prices (around `p*(t)`) and capacities (around
/// `Q(t)`). One row per step and inequality, holding the worst probe.
pub fn cert_inverse_drift<U: Utility, G: Rng>(
    utilities: &[Vec<U>],
    capacities: &[Vec<f64>],
    params: &GlobalParams,
    probes: usize,
    rng: &mut G,
) -> Result<Vec<BoundRow>> {
    let (alpha, sigma, l) = (params.alpha, params.sigma, params.lipschitz_grad);
    let rhs_single = alpha / sigma;
    let rhs_aggregate = alpha * l * l / (sigma * sigma);
    let mut rows = Vec::new();
    for t in 0..utilities.len().saturating_sub(1) {
        let (now, next) = (&utilities[t], &utilities[t + 1]);
        let center = oracle::aggregate_inverse(now, &capacities[t])?;
        let price_radius = 1.0 + vector::norm(&center);
        let cap_radius = 1.0 + vector::norm(&capacities[t]);
        let (mut worst_single, mut worst_user) = (0.0, None);
        let mut worst_aggregate: f64 = 0.0;
        for _ in 0..probes {
            let p = random_offset(&center, price_radius, rng);
            for (i, (a, b)) in now.iter().zip(next).enumerate() {
                let d = vector::distance(&a.inverse_gradient(&p), &b.inverse_gradient(&p));
                if d > worst_single {
                    worst_single = d;
                    worst_user = Some(i);
                }
            }
            let q = random_offset(&capacities[t], cap_radius, rng);
            let d = vector::distance(&oracle::aggregate_inverse(now, &q)?, &oracle::aggregate_inverse(next, &q)?);
            worst_aggregate = worst_aggregate.max(d);
        }
        rows.push(BoundRow::new(t, BoundId::InverseGradientDrift, worst_user, worst_single, rhs_single, true));
        rows.push(BoundRow::new(t, BoundId::AggregateInverseDrift, None, worst_aggregate, rhs_aggregate, true));
    }
    Ok(rows)
}

/// One dual gradient step from random prices around `p*`, against
/// `c²‖p* − p‖²`. Returns the probe with the largest ratio `lhs/rhs`.
pub fn cert_contraction<U: Utility, G: Rng>(
    t: usize,
    users: &[U],
    capacity: &[f64],
    params: &GlobalParams,
    probes: usize,
    rng: &mut G,
) -> Result<Option<BoundRow>> {
    let regime = params.eta_in_proven_range();
    let c = params.contraction_factor();
    let opt = oracle::aggregate_inverse(users, capacity)?;
    let radius = 1.0 + vector::norm(&opt);
    let mut worst: Option<BoundRow> = None;
    for _ in 0..probes {
        let p = random_offset(&opt, radius, rng);
        let grad = oracle::dual_gradient(users, capacity, &p);
        let stepped = vector::sub(&p, &vector::scale(&grad, params.eta));
        let lhs = vector::distance(&opt, &stepped).powi(2);
        let rhs = c * c * vector::distance(&opt, &p).powi(2);
        let row = BoundRow::new(t, BoundId::Contraction, None, lhs, rhs, regime);
        let ratio = |r: &BoundRow| if r.rhs > 0.0 { r.lhs / r.rhs } else { f64::INFINITY };
        if worst.as_ref().is_none_or(|w| ratio(&row) > ratio(w)) {
            worst = Some(row);
        }
    }
    Ok(worst)
}

/// Measured dual curvature at step `t` against the derived constants
/// (certified) and the quoted ones (reference).
pub fn cert_dual_curvature(t: usize, curvature: &DualCurvature) -> Vec<BoundRow> {
    vec![
        BoundRow::new(t, BoundId::DualStrongConvexity, None, curvature.derived_strong_convexity, curvature.measured_strong_convexity, true),
        BoundRow::new(t, BoundId::DualSmoothness, None, curvature.measured_smoothness, curvature.derived_smoothness, true),
        BoundRow::new(t, BoundId::QuotedDualStrongConvexity, None, curvature.quoted_strong_convexity, curvature.measured_strong_convexity, true),
        BoundRow::new(t, BoundId::QuotedDualSmoothness, None, curvature.measured_smoothness, curvature.quoted_smoothness, true),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Random probes per step for the inverse-drift and contraction certificates.
    pub probes: usize,
    /// Random directions per step for the curvature measurement.
    pub curvature_probes: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            probes: 100,
            curvature_probes: 10,
            seed: 0,
        }
    }
}

/// Run every certificate over one run.
pub fn certify_run<U: Utility>(
    utilities: &[Vec<U>],
    capacities: &[Vec<f64>],
    online: &Trajectory,
    oracle: &[OracleSolution],
    params: &GlobalParams,
    options: CertifyOptions,
) -> Result<BoundReport> {
    check_lengths(online, oracle)?;
    if utilities.len() != online.len() || capacities.len() != online.len() {
        return Err(Error::DimensionMismatch {
            context: "utilities/capacities vs trajectory",
            expected: online.len(),
            actual: utilities.len().min(capacities.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let domain = allocation_domain(online, oracle);
    let lprime = params
        .lipschitz_value
        .or_else(|| domain.as_ref().map(|d| value_lipschitz(utilities, d)))
        .unwrap_or(0.0);

    let mut rows = Vec::new();
    rows.extend(cert_price_volatility(oracle, params));
    rows.extend(cert_primal_volatility(oracle, params));
    rows.extend(cert_dual_tracking(online, oracle, params)?);
    rows.extend(cert_primal_tracking(online, oracle, params)?);
    rows.extend(cert_welfare_gap(online, oracle, utilities, params, lprime)?);
    rows.extend(cert_constraint_violation(online, oracle, params)?);
    rows.extend(cert_inverse_drift(utilities, capacities, params, options.probes, &mut rng)?);
    let mut curvature = Vec::with_capacity(utilities.len());
    for (t, (users, capacity)) in utilities.iter().zip(capacities).enumerate() {
        if let Some(row) = cert_contraction(t, users, capacity, params, options.probes, &mut rng)? {
            rows.push(row);
        }
        if options.curvature_probes > 0 {
            let c = oracle::measure_dual_curvature(
                users,
                capacity,
                &oracle[t].price_opt,
                params.sigma,
                params.lipschitz_grad,
                options.curvature_probes,
                &mut rng,
            );
            rows.extend(cert_dual_curvature(t, &c));
            curvature.push(c);
        }
    }

    let n = params.n_users as f64;
    Ok(BoundReport {
        rows,
        c: params.contraction_factor(),
        b: params.drift_constant(),
        welfare_floor: domain.as_ref().map(|_| n * lprime * params.primal_drift_term()),
        eta: params.eta,
        eta_in_proven_range: params.eta_in_proven_range(),
        sign: online.sign,
        lipschitz_value: Some(lprime),
        lprime_domain: domain,
        curvature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_global_params, QuadraticUtility};
    use crate::od3::{run_od3, Od3Options};
    use crate::traces::SystemTrace;

    fn params(n: usize, gamma: f64, alpha: f64, eta: f64) -> GlobalParams {
        GlobalParams {
            n_users: n,
            n_suppliers: 1,
            sigma: 2.0,
            lipschitz_grad: 2.0,
            lipschitz_value: None,
            gamma,
            alpha,
            eta,
        }
    }

    #[test]
    fn pass_rule_and_slack() {
        let r = BoundRow::new(0, BoundId::PriceVolatility, None, 1.0 + 1e-10, 1.0, true);
        assert!(r.pass);
        let r = BoundRow::new(0, BoundId::PriceVolatility, None, 1.0 + 1e-8, 1.0, true);
        assert!(!r.pass);
        assert!((r.slack + 1e-8).abs() < 1e-15);
        assert!(!BoundRow::new(0, BoundId::PriceVolatility, None, 0.0, f64::NAN, true).pass);
        assert!(BoundRow::new(0, BoundId::DualTracking, None, 5.0, 1.0, false).certified());
    }

    #[test]
    fn constants_c_and_b() {
        let p = params(10, 1.0, 0.5, 0.08);
        assert!((p.contraction_factor() - 0.6).abs() < 1e-12);
        // b = L²(γ/(σN) + α/σ²) = 4(1/20 + 0.5/4) = 0.7
        assert!((p.drift_constant() - 0.7).abs() < 1e-12);
        assert!((p.price_volatility_bound() - p.drift_constant()).abs() < 1e-12);
    }

    #[test]
    fn price_volatility_closed_form() {
        // α = 0, N = 4, γ = 1: rhs = (4/2)(1/4) = 0.5, lhs = (2/N)|ΔQ|.
        let caps = vec![vec![10.0], vec![10.7], vec![10.2], vec![10.2]];
        let trace = SystemTrace::with_static_targets(caps.clone(), vec![vec![2.0]; 4], vec![1.0; 4]).unwrap();
        let utilities = trace.quadratic_utilities();
        let oracle = oracle::solve_trace(&utilities, &trace.capacities).unwrap();
        let rows = cert_price_volatility(&oracle, &params(4, 1.0, 0.0, 0.1));
        assert_eq!(rows.len(), 3);
        for (row, w) in rows.iter().zip(caps.windows(2)) {
            assert_eq!(row.rhs, 0.5);
            assert!((row.lhs - 0.5 * (w[1][0] - w[0][0]).abs()).abs() < 1e-12);
            assert!(row.pass);
        }
    }

    #[test]
    fn primal_volatility_formula_with_utility_drift_only() {
        let p = params(3, 0.0, 0.3, 0.1);
        // α(L²/σ³ + 1/σ) = 0.3(4/8 + 1/2)
        assert!((p.primal_volatility_bound() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn quoted_primal_envelope_is_scaled_dual_transient_plus_drift() {
        let p = params(7, 0.4, 0.2, 0.05);
        let c = p.contraction_factor();
        let e0 = 3.0;
        for t in 0..5 {
            let primal = c.powi(t) / p.sigma * e0 + p.primal_drift_term();
            let via_dual = (c.powi(t) * e0 + p.drift_constant()) / p.sigma;
            assert!((primal - via_dual).abs() < 1e-12);
        }
    }

    fn static_pair_run(p0: f64, eta: f64) -> (Vec<Vec<QuadraticUtility>>, SystemTrace, Trajectory, Vec<OracleSolution>, GlobalParams) {
        let trace = SystemTrace::with_static_targets(vec![vec![4.0]; 12], vec![vec![3.0], vec![5.0]], vec![1.0, 1.0]).unwrap();
        let utilities = trace.quadratic_utilities();
        let params = derive_global_params(&utilities, &trace).unwrap().with_eta(eta);
        let traj = run_od3(&trace, &utilities, &params, &[p0], Od3Options::default()).unwrap();
        let oracle = oracle::solve_trace(&utilities, &trace.capacities).unwrap();
        (utilities, trace, traj, oracle, params)
    }

    #[test]
    fn static_case_collapses_to_linear_envelope() {
        let (_, _, traj, oracle, params) = static_pair_run(0.0, 0.4);
        assert_eq!(params.drift_constant(), 0.0);
        let rows = cert_dual_tracking(&traj, &oracle, &params).unwrap();
        let c = params.contraction_factor();
        for r in rows.iter().filter(|r| r.bound == BoundId::DualTracking) {
            assert!((r.rhs - c.powi(r.t as i32) * 4.0).abs() < 1e-12);
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn warm_start_static_has_zero_errors() {
        let (utilities, trace, traj, oracle, params) = static_pair_run(4.0, 0.4);
        let report = certify_run(&utilities, &trace.capacities, &traj, &oracle, &params, CertifyOptions { probes: 5, ..Default::default() }).unwrap();
        for bound in [BoundId::DualTracking, BoundId::PrimalTracking, BoundId::WelfareGap, BoundId::ConstraintViolation] {
            assert!(report.rows_for(bound).all(|r| r.lhs == 0.0 && r.pass), "{bound}");
        }
        assert!(report.all_certified());
    }

    #[test]
    fn constraint_violation_hand_example_is_tight() {
        let (_, _, traj, oracle, params) = static_pair_run(0.0, 0.4);
        let rows = cert_constraint_violation(&traj, &oracle, &params).unwrap();
        let first = rows.iter().find(|r| r.t == 0 && r.bound == BoundId::ConstraintViolation).unwrap();
        assert!((first.lhs - 4.0).abs() < 1e-12);
        assert!((first.rhs - 4.0).abs() < 1e-12);
        assert!(first.pass);
    }

    #[test]
    fn reversed_sign_rows_are_flagged() {
        let trace = SystemTrace::with_static_targets(vec![vec![4.0]; 5], vec![vec![3.0], vec![5.0]], vec![1.0, 1.0]).unwrap();
        let utilities = trace.quadratic_utilities();
        let params = derive_global_params(&utilities, &trace).unwrap();
        let opts = Od3Options { sign: SignConvention::Reversed, ..Default::default() };
        let traj = run_od3(&trace, &utilities, &params, &[0.0], opts).unwrap();
        let oracle = oracle::solve_trace(&utilities, &trace.capacities).unwrap();
        let rows = cert_dual_tracking(&traj, &oracle, &params).unwrap();
        assert!(rows.iter().all(|r| !r.in_regime));
        assert!(rows.iter().any(|r| !r.pass));
    }

    #[test]
    fn inverse_drift_is_target_shift_for_unit_quadratics() {
        let targets = vec![vec![vec![1.0], vec![2.0]], vec![vec![1.3], vec![1.9]]];
        let trace = SystemTrace::new(vec![vec![3.0], vec![3.0]], targets, vec![1.0, 1.0]).unwrap();
        let utilities = trace.quadratic_utilities();
        let params = derive_global_params(&utilities, &trace).unwrap();
        assert!((params.alpha - 0.6).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = cert_inverse_drift(&utilities, &trace.capacities, &params, 20, &mut rng).unwrap();
        let single = &rows[0];
        assert_eq!(single.bound, BoundId::InverseGradientDrift);
        assert!((single.lhs - 0.3).abs() < 1e-12);
        assert_eq!(single.user, Some(0));
        assert!((single.rhs - 0.3).abs() < 1e-12);
        assert!(single.pass);
        // Γ^{-1}(Q) = (Σs − Q)·2/N: shift 0.2
        assert!((rows[1].lhs - 0.2).abs() < 1e-12);
    }

    #[test]
    fn contraction_at_optimum_is_zero() {
        let users = vec![QuadraticUtility::unit(vec![3.0]), QuadraticUtility::unit(vec![5.0])];
        let p = params(2, 0.0, 0.0, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let row = cert_contraction(0, &users, &[4.0], &p, 50, &mut rng).unwrap().unwrap();
        // σ = L: the dual step contracts by exactly c, so every probe is tight.
        assert!(row.pass);
        assert!((row.lhs - row.rhs).abs() <= 1e-9 * (1.0 + row.rhs));
        let stepped = 4.0 - 0.4 * oracle::dual_gradient(&users, &[4.0], &[4.0])[0];
        assert_eq!(stepped, 4.0);
    }

    #[test]
    fn summary_and_csv() {
        let (utilities, trace, traj, oracle, params) = static_pair_run(0.0, 0.4);
        let report = certify_run(&utilities, &trace.capacities, &traj, &oracle, &params, CertifyOptions { probes: 3, ..Default::default() }).unwrap();
        let summary = report.summary();
        assert_eq!(summary[&BoundId::PriceVolatility].pass_rate, Some(1.0));
        assert!(summary[&BoundId::DualTrackingAccumulated].reference);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,bound,user,lhs,rhs,slack,pass,in_regime\n"));
        assert_eq!(text.lines().count(), report.rows.len() + 1);
    }
}
