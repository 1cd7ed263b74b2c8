//! Experiment runner: configuration, presets, artifacts and the randomized suite.
//!
//! A run writes four files into its output directory:
//!
//! - `trajectory.csv`: per step, online and optimal prices, per-user
//!   allocations, aggregate allocation, capacity and both welfares.
//! - `bounds.csv`: one row per step per certificate.
//! - `summary.json`: per-certificate pass rate and worst slack.
//! - `meta.json`: the resolved configuration and every derived constant.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{certify_run, BoundId, BoundReport, BoundRow, BoundSummary, CertifyOptions};
use crate::error::{Error, Result};
use crate::model::{derive_global_params, Dimensions, GlobalParams, QuadraticUtility};
use crate::od3::{run_od3, Od3Options, SignConvention, Trajectory};
use crate::oracle::{self, OracleSolution};
use crate::traces::{self, AffineScaling, CapacitySeries, SystemTrace, TraceSynthesis};

/// Capacity sample bundled with the crate: one synthetic day of a
/// biofuel/wind/solar mix at 5-minute resolution.
pub const SAMPLE_CAPACITY_CSV: &str = include_str!("../data/sample_capacity.csv");

/// Step-size rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EtaChoice {
    /// `2L/(N(1+Lσ))`, the largest step size with a proven contraction.
    #[default]
    ProvenMax,
    /// `1/N`.
    OneOverN,
    Value(f64),
}

impl EtaChoice {
    pub fn resolve(self, params: &GlobalParams) -> Result<f64> {
        let eta = match self {
            EtaChoice::ProvenMax => params.proven_eta_max(),
            EtaChoice::OneOverN => 1.0 / params.n_users as f64,
            EtaChoice::Value(v) => v,
        };
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("must resolve to a positive number, got {eta}")));
        }
        Ok(eta)
    }
}

impl FromStr for EtaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proven-max" => Ok(EtaChoice::ProvenMax),
            "paper-1overN" => Ok(EtaChoice::OneOverN),
            other => other
                .parse::<f64>()
                .map(EtaChoice::Value)
                .map_err(|_| Error::param("eta", format!("expected proven-max, paper-1overN or a number, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for EtaChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EtaChoice::ProvenMax => f.write_str("proven-max"),
            EtaChoice::OneOverN => f.write_str("paper-1overN"),
            EtaChoice::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for EtaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EtaChoice::Value(v) => s.serialize_f64(*v),
            named => s.serialize_str(&named.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for EtaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(EtaChoice::Value(v)),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Initial price `p(0)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPrice {
    #[default]
    Zero,
    /// Start at the optimal price of the first step.
    Warm,
    Value(Vec<f64>),
}

/// Base user targets `s_i(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseTargets {
    /// Every user and coordinate starts at the same value.
    Uniform(f64),
    /// `N × R`.
    PerUser(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub base: BaseTargets,
    /// Per-step bound on each user's gradient drift; targets random-walk within it.
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapacitySource {
    /// Random walk from `base` with steps of length at most `gamma`.
    Synth { base: Vec<f64>, gamma: f64 },
    /// Columns of a CSV file, or of the bundled sample when `path` is absent,
    /// optionally rescaled so each column spans `[lo, hi]`.
    Csv {
        #[serde(default)]
        path: Option<PathBuf>,
        columns: Vec<String>,
        #[serde(default)]
        rescale: Option<[f64; 2]>,
    },
}

/// One experiment, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub n_users: usize,
    pub n_suppliers: usize,
    /// Required for synthetic capacities; truncates CSV input when set.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Per-user utility scales `k_i` in `U_i = −k_i‖q − s_i‖²`; all ones when absent.
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    pub targets: TargetSpec,
    pub capacity: CapacitySource,
    #[serde(default)]
    pub eta: EtaChoice,
    #[serde(default)]
    pub p0: InitialPrice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sign: SignConvention,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Random probes per step for the probe-based certificates.
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_name() -> String {
    "run".to_string()
}

fn default_probes() -> usize {
    100
}

pub const PRESETS: [&str; 3] = ["static-smoke", "sec5", "drifting"];

impl RunConfig {
    /// Built-in configurations.
    ///
    /// - `static-smoke`: two users with targets 3 and 5 sharing capacity 4,
    ///   nothing drifts, warm start.
    /// - `sec5`: ten users, one supplier fed by the bundled capacity sample,
    ///   `η = 1/N`.
    /// - `drifting`: ten users, two suppliers, synthetic drift in both
    ///   capacities and targets, proven-range step size.
    pub fn preset(name: &str) -> Result<Self> {
        let config = match name {
            "static-smoke" => RunConfig {
                name: name.into(),
                n_users: 2,
                n_suppliers: 1,
                horizon: Some(50),
                scales: None,
                targets: TargetSpec {
                    base: BaseTargets::PerUser(vec![vec![3.0], vec![5.0]]),
                    alpha: 0.0,
                },
                capacity: CapacitySource::Synth { base: vec![4.0], gamma: 0.0 },
                eta: EtaChoice::ProvenMax,
                p0: InitialPrice::Warm,
                seed: 0,
                sign: SignConvention::DualDescent,
                out: None,
                probes: default_probes(),
            },
            "sec5" => RunConfig {
                name: name.into(),
                n_users: 10,
                n_suppliers: 1,
                horizon: None,
                scales: None,
                targets: TargetSpec {
                    base: BaseTargets::Uniform(1.5),
                    alpha: 0.02,
                },
                capacity: CapacitySource::Csv {
                    path: None,
                    columns: vec!["total_mw".into()],
                    rescale: Some([9.0, 12.0]),
                },
                eta: EtaChoice::OneOverN,
                p0: InitialPrice::Zero,
                seed: 5,
                sign: SignConvention::DualDescent,
                out: None,
                probes: default_probes(),
            },
            "drifting" => RunConfig {
                name: name.into(),
                n_users: 10,
                n_suppliers: 2,
                horizon: Some(200),
                scales: None,
                targets: TargetSpec {
                    base: BaseTargets::Uniform(1.0),
                    alpha: 0.1,
                },
                capacity: CapacitySource::Synth { base: vec![8.0, 8.0], gamma: 0.1 },
                eta: EtaChoice::ProvenMax,
                p0: InitialPrice::Zero,
                seed: 1,
                sign: SignConvention::DualDescent,
                out: None,
                probes: default_probes(),
            },
            other => {
                return Err(Error::Config(format!("unknown preset `{other}` (known: {})", PRESETS.join(", "))));
            }
        };
        Ok(config)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text)?;
        // Relative CSV paths are taken relative to the config file.
        if let CapacitySource::Csv { path: Some(csv), .. } = &mut config.capacity {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(config)
    }

    fn dims(&self) -> Result<Dimensions> {
        Dimensions::new(self.n_users, self.n_suppliers)
    }

    fn base_targets(&self) -> Result<Vec<Vec<f64>>> {
        match &self.targets.base {
            BaseTargets::Uniform(v) => Ok(vec![vec![*v; self.n_suppliers]; self.n_users]),
            BaseTargets::PerUser(rows) => {
                if rows.len() != self.n_users || rows.iter().any(|r| r.len() != self.n_suppliers) {
                    return Err(Error::Config(format!(
                        "targets.base must be {} rows of {} values",
                        self.n_users, self.n_suppliers
                    )));
                }
                Ok(rows.clone())
            }
        }
    }

    fn scales(&self) -> Vec<f64> {
        self.scales.clone().unwrap_or_else(|| vec![1.0; self.n_users])
    }

    fn capacity_series(&self) -> Result<Option<(CapacitySeries, Vec<AffineScaling>)>> {
        let CapacitySource::Csv { path, columns, rescale } = &self.capacity else {
            return Ok(None);
        };
        if columns.len() != self.n_suppliers {
            return Err(Error::Config(format!(
                "capacity.columns names {} columns for {} suppliers",
                columns.len(),
                self.n_suppliers
            )));
        }
        let mut series = match path {
            Some(p) => traces::ingest_capacity_csv(p, columns)?,
            None => traces::read_capacity_csv(SAMPLE_CAPACITY_CSV.as_bytes(), columns, "bundled sample")?,
        };
        if let Some(h) = self.horizon {
            series = series.truncated(h);
        }
        Ok(Some(match rescale {
            Some([lo, hi]) => series.rescaled(*lo, *hi)?,
            None => (series, Vec::new()),
        }))
    }

    /// Build the system trace described by this configuration.
    pub fn build_trace(&self) -> Result<(SystemTrace, Vec<AffineScaling>)> {
        let dims = self.dims()?;
        let base_targets = self.base_targets()?;
        let scales = self.scales();
        match &self.capacity {
            CapacitySource::Synth { base, gamma } => {
                let horizon = self
                    .horizon
                    .ok_or_else(|| Error::Config("horizon is required for synthetic capacities".into()))?;
                let spec = TraceSynthesis {
                    dims,
                    horizon,
                    gamma: *gamma,
                    alpha: self.targets.alpha,
                    seed: self.seed,
                    base_capacity: base.clone(),
                    base_targets,
                    scales: Some(scales),
                };
                Ok((traces::synth_trace(&spec)?, Vec::new()))
            }
            CapacitySource::Csv { .. } => {
                let (series, scaling) = self.capacity_series()?.expect("csv source");
                if series.horizon() == 0 {
                    return Err(Error::EmptyHorizon);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(1);
                let targets = traces::synth_targets(&base_targets, &scales, series.horizon(), self.targets.alpha, &mut rng)?;
                let trace = SystemTrace::new(series.capacities, targets, scales)?
                    .with_declared_bounds(None, Some(self.targets.alpha));
                Ok((trace, scaling))
            }
        }
    }
}

/// Everything derived from a configuration before the loop runs.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub config: RunConfig,
    pub trace: SystemTrace,
    pub utilities: Vec<Vec<QuadraticUtility>>,
    pub params: GlobalParams,
    pub p0: Vec<f64>,
    pub scaling: Vec<AffineScaling>,
}

pub fn prepare(config: &RunConfig) -> Result<PreparedRun> {
    let (trace, scaling) = config.build_trace()?;
    let utilities = trace.quadratic_utilities();
    let params = derive_global_params(&utilities, &trace)?;
    let eta = config.eta.resolve(&params)?;
    let params = params.with_eta(eta);
    let p0 = match &config.p0 {
        InitialPrice::Zero => vec![0.0; config.n_suppliers],
        InitialPrice::Warm => oracle::aggregate_inverse(&utilities[0], &trace.capacities[0])?,
        InitialPrice::Value(v) => {
            if v.len() != config.n_suppliers {
                return Err(Error::DimensionMismatch {
                    context: "p0",
                    expected: config.n_suppliers,
                    actual: v.len(),
                });
            }
            v.clone()
        }
    };
    Ok(PreparedRun {
        config: config.clone(),
        trace,
        utilities,
        params,
        p0,
        scaling,
    })
}

/// Run-level metadata written to `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub config: RunConfig,
    pub horizon: usize,
    pub realized_gamma: f64,
    pub realized_alpha: f64,
    pub params: GlobalParams,
    pub p0: Vec<f64>,
    pub c: f64,
    pub b: f64,
    pub eta: f64,
    pub eta_max: f64,
    pub eta_in_proven_range: bool,
    pub lipschitz_value: Option<f64>,
    pub welfare_floor: Option<f64>,
    pub capacity_scaling: Vec<AffineScaling>,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub prepared: PreparedRun,
    pub trajectory: Trajectory,
    pub oracle: Vec<OracleSolution>,
    pub report: BoundReport,
}

impl RunOutcome {
    pub fn certified(&self) -> bool {
        self.report.all_certified()
    }

    pub fn meta(&self) -> RunMeta {
        let p = &self.prepared;
        RunMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: p.config.clone(),
            horizon: p.trace.horizon(),
            realized_gamma: p.trace.realized_gamma,
            realized_alpha: p.trace.realized_alpha,
            params: p.params.clone(),
            p0: p.p0.clone(),
            c: self.report.c,
            b: self.report.b,
            eta: p.params.eta,
            eta_max: p.params.proven_eta_max(),
            eta_in_proven_range: p.params.eta_in_proven_range(),
            lipschitz_value: self.report.lipschitz_value,
            welfare_floor: self.report.welfare_floor,
            capacity_scaling: p.scaling.clone(),
            certified: self.certified(),
        }
    }

    /// Online welfare per step.
    pub fn online_welfare(&self) -> Vec<f64> {
        self.trajectory
            .states
            .iter()
            .zip(&self.prepared.utilities)
            .map(|(s, users)| oracle::welfare(users, &s.allocations))
            .collect()
    }

    pub fn write_trajectory_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let n = self.prepared.config.n_users;
        let r = self.prepared.config.n_suppliers;
        let mut header = vec!["t".to_string()];
        for j in 0..r {
            header.push(format!("p_{j}"));
            header.push(format!("p_opt_{j}"));
        }
        for i in 0..n {
            for j in 0..r {
                header.push(format!("q_{i}_{j}"));
                header.push(format!("q_opt_{i}_{j}"));
            }
        }
        for j in 0..r {
            header.push(format!("sum_q_{j}"));
            header.push(format!("capacity_{j}"));
        }
        header.extend(["welfare_online", "welfare_opt", "welfare_gap"].map(String::from));

        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&header)?;
        let welfare = self.online_welfare();
        for (t, (state, opt)) in self.trajectory.states.iter().zip(&self.oracle).enumerate() {
            let mut row = vec![t.to_string()];
            for j in 0..r {
                row.push(state.price[j].to_string());
                row.push(opt.price_opt[j].to_string());
            }
            for i in 0..n {
                for j in 0..r {
                    row.push(state.allocations[i][j].to_string());
                    row.push(opt.allocations_opt[i][j].to_string());
                }
            }
            for (excess, capacity) in state.excess.iter().zip(&self.prepared.trace.capacities[t]) {
                row.push((excess + capacity).to_string());
                row.push(capacity.to_string());
            }
            row.push(welfare[t].to_string());
            row.push(opt.welfare_opt.to_string());
            row.push((welfare[t] - opt.welfare_opt).abs().to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("trajectory csv", e))?;
        Ok(())
    }

    /// Write `trajectory.csv`, `bounds.csv`, `summary.json` and `meta.json` into `dir`.
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let path = dir.join(name);
            fs::File::create(&path).map(std::io::BufWriter::new).map_err(|e| Error::io(path, e))
        };
        self.write_trajectory_csv(create("trajectory.csv")?)?;
        self.report.write_csv(create("bounds.csv")?)?;
        write_json(create("summary.json")?, &RunSummary::of(&self.report))?;
        write_json(create("meta.json")?, &self.meta())?;
        Ok(())
    }
}

fn write_json<W: std::io::Write, T: Serialize>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer).map_err(|e| Error::io("json output", e))?;
    writer.flush().map_err(|e| Error::io("json output", e))
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub certified: bool,
    pub bounds: BTreeMap<BoundId, BoundSummary>,
}

impl RunSummary {
    pub fn of(report: &BoundReport) -> Self {
        RunSummary {
            certified: report.all_certified(),
            bounds: report.summary(),
        }
    }
}

/// Run the online loop, the oracle and every certificate.
pub fn execute(prepared: PreparedRun) -> Result<RunOutcome> {
    let options = Od3Options {
        sign: prepared.config.sign,
        parallel: false,
    };
    let trajectory = run_od3(&prepared.trace, &prepared.utilities, &prepared.params, &prepared.p0, options)?;
    let oracle = oracle::solve_trace(&prepared.utilities, &prepared.trace.capacities)?;
    let report = certify_run(
        &prepared.utilities,
        &prepared.trace.capacities,
        &trajectory,
        &oracle,
        &prepared.params,
        CertifyOptions {
            probes: prepared.config.probes,
            seed: prepared.config.seed,
            ..CertifyOptions::default()
        },
    )?;
    Ok(RunOutcome {
        prepared,
        trajectory,
        oracle,
        report,
    })
}

/// Prepare, execute and, when `out` is given, write the artifacts.
pub fn run_experiment(config: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let outcome = execute(prepare(config)?)?;
    if let Some(dir) = out {
        outcome.write_artifacts(dir)?;
    }
    Ok(outcome)
}

/// Randomized configuration `k` of the certificate suite.
///
/// Cycles through `N ∈ {2, 10, 50}`, `R ∈ {1, 3}`, `γ ∈ {0, 0.1, 1}` and
/// `α ∈ {0, 0.1, 1}`; scales, base targets and base capacity are drawn from
/// the seed. Prices start at zero and the step size is the proven maximum.
pub fn suite_config(k: usize, seed: u64, horizon: usize, probes: usize) -> RunConfig {
    const USERS: [usize; 3] = [2, 10, 50];
    const SUPPLIERS: [usize; 2] = [1, 3];
    const DRIFTS: [f64; 3] = [0.0, 0.1, 1.0];
    let n = USERS[k % 3];
    let r = SUPPLIERS[(k / 3) % 2];
    let gamma = DRIFTS[(k / 6) % 3];
    let alpha = DRIFTS[(k / 18) % 3];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let scales: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let targets: Vec<Vec<f64>> = (0..n).map(|_| (0..r).map(|_| rng.random_range(1.0..3.0)).collect()).collect();
    let capacity: Vec<f64> = (0..r)
        .map(|j| 0.8 * targets.iter().map(|s| s[j]).sum::<f64>())
        .collect();
    RunConfig {
        name: format!("suite-{k}"),
        n_users: n,
        n_suppliers: r,
        horizon: Some(horizon),
        scales: Some(scales),
        targets: TargetSpec {
            base: BaseTargets::PerUser(targets),
            alpha,
        },
        capacity: CapacitySource::Synth { base: capacity, gamma },
        eta: EtaChoice::ProvenMax,
        p0: InitialPrice::Zero,
        seed,
        sign: SignConvention::DualDescent,
        out: None,
        probes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seeds: usize,
    pub base_seed: u64,
    pub horizon: usize,
    pub probes: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seeds: 100,
            base_seed: 0,
            horizon: 200,
            probes: 100,
        }
    }
}

/// Outcome of one suite member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRun {
    pub index: usize,
    pub seed: u64,
    pub n_users: usize,
    pub n_suppliers: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub eta: f64,
    pub certified: bool,
    /// Failing rows, with the configuration above as their counterexample state.
    pub failures: Vec<BoundRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub options: SuiteOptions,
    pub certified: bool,
    pub bounds: BTreeMap<BoundId, BoundSummary>,
    pub runs: Vec<SuiteRun>,
}

impl SuiteOutcome {
    pub fn write_json(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("summary.json");
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_json(std::io::BufWriter::new(file), self)
    }

    /// Human-readable table of the per-bound results.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for (bound, s) in &self.bounds {
            let rate = s.pass_rate.map_or("n/a".to_string(), |r| format!("{:.4}", r));
            let worst = s.worst_slack.map_or("n/a".to_string(), |w| format!("{w:.3e}"));
            let tag = if s.reference { " (reference)" } else { "" };
            let _ = writeln!(out, "{:<32} pass_rate={rate:<7} worst_slack={worst:<11} rows={}{tag}", bound.name(), s.rows);
        }
        out
    }
}

/// Run the randomized certificate suite, seeds in parallel.
pub fn run_suite(options: &SuiteOptions) -> Result<SuiteOutcome> {
    let runs: Vec<(SuiteRun, BTreeMap<BoundId, BoundSummary>)> = (0..options.seeds)
        .into_par_iter()
        .map(|k| {
            let seed = options.base_seed + k as u64;
            let config = suite_config(k, seed, options.horizon, options.probes);
            let outcome = execute(prepare(&config)?)?;
            let p = &outcome.prepared;
            let run = SuiteRun {
                index: k,
                seed,
                n_users: config.n_users,
                n_suppliers: config.n_suppliers,
                gamma: p.trace.declared_gamma.unwrap_or(p.trace.realized_gamma),
                alpha: config.targets.alpha,
                eta: p.params.eta,
                certified: outcome.certified(),
                failures: outcome.report.failures().cloned().collect(),
            };
            Ok((run, outcome.report.summary()))
        })
        .collect::<Result<_>>()?;

    let mut bounds: BTreeMap<BoundId, BoundSummary> = BTreeMap::new();
    for (_, summary) in &runs {
        for (id, s) in summary {
            bounds.entry(*id).and_modify(|acc| acc.merge(s)).or_insert_with(|| s.clone());
        }
    }
    let runs: Vec<SuiteRun> = runs.into_iter().map(|(r, _)| r).collect();
    Ok(SuiteOutcome {
        options: options.clone(),
        certified: runs.iter().all(|r| r.certified),
        bounds,
        runs,
    })
}
