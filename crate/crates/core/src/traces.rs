//! Time series of supplier capacities `Q(t)` and user targets `s_i^t`.
//!
//! A trace is indexed by algorithm iteration: step `t` of the online loop
//! consumes `Q(t)` and the step-`t` utilities. Synthetic traces realise the
//! drift bounds by construction; real capacity data comes in through
//! [`read_capacity_csv`] and has its drift measured instead.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dimensions, QuadraticUtility};
use crate::vector;

/// Capacities and quadratic-utility targets over a horizon of `T` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemTrace {
    /// `T × R`.
    pub capacities: Vec<Vec<f64>>,
    /// `T × N × R`.
    pub targets: Vec<Vec<Vec<f64>>>,
    /// Per-user utility scale, constant over time.
    pub scales: Vec<f64>,
    /// `max_t ‖Q(t+1) − Q(t)‖`.
    pub realized_gamma: f64,
    /// `max_{t,i} 2·scale_i·‖s_i^{t+1} − s_i^t‖`.
    pub realized_alpha: f64,
    /// Capacity drift bound the trace was built to respect, if any.
    pub declared_gamma: Option<f64>,
    /// Utility drift bound the trace was built to respect, if any.
    pub declared_alpha: Option<f64>,
}

impl SystemTrace {
    pub fn new(capacities: Vec<Vec<f64>>, targets: Vec<Vec<Vec<f64>>>, scales: Vec<f64>) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::EmptyHorizon);
        }
        if targets.len() != capacities.len() {
            return Err(Error::DimensionMismatch {
                context: "target steps vs capacity steps",
                expected: capacities.len(),
                actual: targets.len(),
            });
        }
        let r = capacities[0].len();
        let n = scales.len();
        Dimensions::new(n, r)?;
        for row in &capacities {
            check_len("capacity row", r, row.len())?;
            check_finite("capacities", row)?;
        }
        for step in &targets {
            check_len("users per target step", n, step.len())?;
            for s in step {
                check_len("target dimension", r, s.len())?;
                check_finite("targets", s)?;
            }
        }
        if let Some(bad) = scales.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::param("scales", format!("must be positive and finite, got {bad}")));
        }
        let mut trace = SystemTrace {
            capacities,
            targets,
            scales,
            realized_gamma: 0.0,
            realized_alpha: 0.0,
            declared_gamma: None,
            declared_alpha: None,
        };
        trace.realized_gamma = max_with_arg(&capacity_drifts(&trace)).0;
        trace.realized_alpha = max_with_arg(&utility_drifts(&trace)).0;
        Ok(trace)
    }

    /// Capacities paired with targets that never change.
    pub fn with_static_targets(capacities: Vec<Vec<f64>>, targets: Vec<Vec<f64>>, scales: Vec<f64>) -> Result<Self> {
        let horizon = capacities.len();
        SystemTrace::new(capacities, vec![targets; horizon], scales)
    }

    pub fn with_declared_bounds(mut self, gamma: Option<f64>, alpha: Option<f64>) -> Self {
        self.declared_gamma = gamma;
        self.declared_alpha = alpha;
        self
    }

    pub fn horizon(&self) -> usize {
        self.capacities.len()
    }

    pub fn n_users(&self) -> usize {
        self.scales.len()
    }

    pub fn n_suppliers(&self) -> usize {
        self.capacities.first().map_or(0, Vec::len)
    }

    pub fn dims(&self) -> Dimensions {
        Dimensions {
            n_users: self.n_users(),
            n_suppliers: self.n_suppliers(),
        }
    }

    pub fn utilities_at(&self, t: usize) -> Vec<QuadraticUtility> {
        self.targets[t]
            .iter()
            .zip(&self.scales)
            .map(|(s, k)| QuadraticUtility { target: s.clone(), scale: *k })
            .collect()
    }

    /// Utility series `[t][i]` for the whole horizon.
    pub fn quadratic_utilities(&self) -> Vec<Vec<QuadraticUtility>> {
        (0..self.horizon()).map(|t| self.utilities_at(t)).collect()
    }
}

fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { context, expected, actual });
    }
    Ok(())
}

fn check_finite(name: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::param(name, "values must be finite"))
    }
}

/// `‖Q(t+1) − Q(t)‖` for each `t < T−1`.
pub fn capacity_drifts(trace: &SystemTrace) -> Vec<f64> {
    trace
        .capacities
        .windows(2)
        .map(|w| vector::distance(&w[1], &w[0]))
        .collect()
}

/// Per step, the largest user gradient drift `2·scale_i·‖s_i^{t+1} − s_i^t‖`,
/// together with the user attaining it.
fn utility_drifts_with_user(trace: &SystemTrace) -> Vec<(f64, usize)> {
    trace
        .targets
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .zip(&trace.scales)
                .map(|((a, b), k)| 2.0 * k * vector::distance(b, a))
                .enumerate()
                .fold((0.0, 0), |best, (i, d)| if d > best.0 { (d, i) } else { best })
        })
        .collect()
}

pub fn utility_drifts(trace: &SystemTrace) -> Vec<f64> {
    utility_drifts_with_user(trace).into_iter().map(|(d, _)| d).collect()
}

fn max_with_arg(values: &[f64]) -> (f64, Option<usize>) {
    values
        .iter()
        .enumerate()
        .fold((0.0, None), |best, (i, &v)| if v > best.0 { (v, Some(i)) } else { best })
}

/// Random-walk trace generator.
///
/// Each step moves the capacity vector by a uniformly random direction with
/// length uniform in `[0, gamma]`, and each user's target by a random
/// direction with length uniform in `[0, alpha / (2·scale_i)]`, so the
/// gradient drift of every user stays below `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSynthesis {
    pub dims: Dimensions,
    pub horizon: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Length `R`.
    pub base_capacity: Vec<f64>,
    /// `N × R`.
    pub base_targets: Vec<Vec<f64>>,
    /// Length `N`; all ones when `None`.
    pub scales: Option<Vec<f64>>,
}

impl TraceSynthesis {
    pub fn scales(&self) -> Vec<f64> {
        self.scales.clone().unwrap_or_else(|| vec![1.0; self.dims.n_users])
    }
}

const TARGET_STREAM: u64 = 1;

pub fn synth_trace(spec: &TraceSynthesis) -> Result<SystemTrace> {
    if spec.horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    check_bound("gamma", spec.gamma)?;
    check_bound("alpha", spec.alpha)?;
    let Dimensions { n_users, n_suppliers } = spec.dims;
    Dimensions::new(n_users, n_suppliers)?;
    check_len("base capacity", n_suppliers, spec.base_capacity.len())?;
    let scales = spec.scales();
    check_len("scales", n_users, scales.len())?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let capacities = random_walk(&spec.base_capacity, spec.horizon, spec.gamma, &mut rng);
    let mut target_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    target_rng.set_stream(TARGET_STREAM);
    let targets = synth_targets(&spec.base_targets, &scales, spec.horizon, spec.alpha, &mut target_rng)?;

    Ok(SystemTrace::new(capacities, targets, scales)?.with_declared_bounds(Some(spec.gamma), Some(spec.alpha)))
}

/// Drifting targets `T × N × R` whose unit-scale gradient drift stays below
/// `alpha`.
pub fn synth_targets<G: Rng>(
    base_targets: &[Vec<f64>],
    scales: &[f64],
    horizon: usize,
    alpha: f64,
    rng: &mut G,
) -> Result<Vec<Vec<Vec<f64>>>> {
    check_bound("alpha", alpha)?;
    check_len("base targets", scales.len(), base_targets.len())?;
    let mut per_user: Vec<Vec<Vec<f64>>> = Vec::with_capacity(base_targets.len());
    for (base, k) in base_targets.iter().zip(scales) {
        per_user.push(random_walk(base, horizon, alpha / (2.0 * k), rng));
    }
    Ok((0..horizon)
        .map(|t| per_user.iter().map(|walk| walk[t].clone()).collect())
        .collect())
}

fn check_bound(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::param(name, format!("must be a nonnegative finite number, got {value}")));
    }
    Ok(())
}

fn random_walk<G: Rng>(start: &[f64], horizon: usize, bound: f64, rng: &mut G) -> Vec<Vec<f64>> {
    let mut walk = Vec::with_capacity(horizon);
    walk.push(start.to_vec());
    for _ in 1..horizon {
        let step = random_increment(start.len(), bound, rng);
        let next = vector::add(walk.last().unwrap(), &step);
        walk.push(next);
    }
    walk
}

/// Uniform direction on the unit sphere scaled by a radius uniform in `[0, bound]`.
fn random_increment<G: Rng>(dim: usize, bound: f64, rng: &mut G) -> Vec<f64> {
    if bound == 0.0 {
        return vec![0.0; dim];
    }
    let direction = loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let len = vector::norm(&g);
        if len > 1e-12 {
            break vector::scale(&g, 1.0 / len);
        }
    };
    let radius = bound * rng.random::<f64>();
    vector::scale(&direction, radius)
}

/// Capacities read from a CSV file, one column per supplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySeries {
    pub source: String,
    pub columns: Vec<String>,
    /// `T × R`.
    pub capacities: Vec<Vec<f64>>,
    pub realized_gamma: f64,
}

/// Affine map applied to one capacity column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineScaling {
    pub column: String,
    pub source_min: f64,
    pub source_max: f64,
    pub factor: f64,
    pub offset: f64,
}

impl CapacitySeries {
    pub fn horizon(&self) -> usize {
        self.capacities.len()
    }

    /// Keep only the first `horizon` rows.
    pub fn truncated(mut self, horizon: usize) -> Self {
        self.capacities.truncate(horizon);
        self.realized_gamma = gamma_of(&self.capacities);
        self
    }

    /// Compare the largest step-to-step capacity change with a claimed bound.
    pub fn check_gamma(&self, claimed: f64) -> DriftCheck {
        let drifts: Vec<f64> = self.capacities.windows(2).map(|w| vector::distance(&w[1], &w[0])).collect();
        let (realized, worst_step) = max_with_arg(&drifts);
        DriftCheck {
            claimed,
            realized,
            worst_step,
            worst_user: None,
            pass: realized <= claimed + DRIFT_TOLERANCE,
        }
    }

    /// Rescale each column affinely so its minimum maps to `lo` and its
    /// maximum to `hi`. Constant columns map to the midpoint.
    pub fn rescaled(&self, lo: f64, hi: f64) -> Result<(CapacitySeries, Vec<AffineScaling>)> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::param("rescale", format!("need finite lo <= hi, got [{lo}, {hi}]")));
        }
        let mut scalings = Vec::with_capacity(self.columns.len());
        for (j, name) in self.columns.iter().enumerate() {
            let (min, max) = self
                .capacities
                .iter()
                .map(|row| row[j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            let (factor, offset) = if max > min {
                let f = (hi - lo) / (max - min);
                (f, lo - f * min)
            } else {
                (0.0, 0.5 * (lo + hi))
            };
            scalings.push(AffineScaling {
                column: name.clone(),
                source_min: min,
                source_max: max,
                factor,
                offset,
            });
        }
        let capacities: Vec<Vec<f64>> = self
            .capacities
            .iter()
            .map(|row| row.iter().zip(&scalings).map(|(x, s)| s.factor * x + s.offset).collect())
            .collect();
        let realized_gamma = gamma_of(&capacities);
        Ok((
            CapacitySeries {
                source: self.source.clone(),
                columns: self.columns.clone(),
                capacities,
                realized_gamma,
            },
            scalings,
        ))
    }
}

fn gamma_of(capacities: &[Vec<f64>]) -> f64 {
    capacities
        .windows(2)
        .map(|w| vector::distance(&w[1], &w[0]))
        .fold(0.0, f64::max)
}

/// Read capacities from a CSV file with a header row. `columns` names one
/// column per supplier, in supplier order.
pub fn ingest_capacity_csv(path: impl AsRef<Path>, columns: &[String]) -> Result<CapacitySeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_capacity_csv(file, columns, &path.display().to_string())
}

/// As [`ingest_capacity_csv`], from any reader. `source` names the input in
/// error messages. Rows are numbered by file line, header being line 1.
pub fn read_capacity_csv<R: Read>(reader: R, columns: &[String], source: &str) -> Result<CapacitySeries> {
    if columns.is_empty() {
        return Err(Error::param("columns", "select at least one capacity column"));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut index = Vec::with_capacity(columns.len());
    for name in columns {
        let pos = headers.iter().position(|h| h == name).ok_or_else(|| Error::Ingest {
            path: source.to_string(),
            row: 1,
            column: name.clone(),
            reason: format!("column not found in header [{}]", headers.iter().collect::<Vec<_>>().join(", ")),
        })?;
        index.push(pos);
    }
    let mut capacities = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record?;
        let mut row = Vec::with_capacity(index.len());
        for (name, &pos) in columns.iter().zip(&index) {
            let cell = record.get(pos).unwrap_or("");
            let fail = |reason: String| Error::Ingest {
                path: source.to_string(),
                row: line,
                column: name.clone(),
                reason,
            };
            if cell.is_empty() {
                return Err(fail("missing value".into()));
            }
            let v: f64 = cell.parse().map_err(|_| fail(format!("cannot parse `{cell}` as a number")))?;
            if !v.is_finite() {
                return Err(fail(format!("non-finite value `{cell}`")));
            }
            row.push(v);
        }
        capacities.push(row);
    }
    if capacities.is_empty() {
        return Err(Error::Ingest {
            path: source.to_string(),
            row: 2,
            column: columns[0].clone(),
            reason: "no data rows".into(),
        });
    }
    let realized_gamma = gamma_of(&capacities);
    Ok(CapacitySeries {
        source: source.to_string(),
        columns: columns.to_vec(),
        capacities,
        realized_gamma,
    })
}

/// Outcome of checking one drift bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftCheck {
    pub claimed: f64,
    pub realized: f64,
    /// Step `t` whose transition `t → t+1` attains the realized drift.
    pub worst_step: Option<usize>,
    /// User attaining the realized utility drift.
    pub worst_user: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceValidation {
    pub gamma: DriftCheck,
    pub alpha: DriftCheck,
}

impl TraceValidation {
    pub fn passed(&self) -> bool {
        self.gamma.pass && self.alpha.pass
    }
}

const DRIFT_TOLERANCE: f64 = 1e-12;

/// Recompute the drifts of `trace` and compare them to claimed bounds.
pub fn validate_trace(trace: &SystemTrace, claimed_gamma: f64, claimed_alpha: f64) -> TraceValidation {
    let (gamma, gamma_step) = max_with_arg(&capacity_drifts(trace));
    let per_step = utility_drifts_with_user(trace);
    let (alpha, alpha_step) = max_with_arg(&per_step.iter().map(|(d, _)| *d).collect::<Vec<_>>());
    TraceValidation {
        gamma: DriftCheck {
            claimed: claimed_gamma,
            realized: gamma,
            worst_step: gamma_step,
            worst_user: None,
            pass: gamma <= claimed_gamma + DRIFT_TOLERANCE,
        },
        alpha: DriftCheck {
            claimed: claimed_alpha,
            realized: alpha,
            worst_step: alpha_step,
            worst_user: alpha_step.map(|t| per_step[t].1),
            pass: alpha <= claimed_alpha + DRIFT_TOLERANCE,
        },
    }
}
