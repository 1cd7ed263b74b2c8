//! Command-line front end for the experiment runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use od3::experiment::{self, EtaChoice, RunConfig, SuiteOptions, PRESETS};
use od3::traces;
use od3::SignConvention;

#[derive(Parser)]
#[command(name = "od3", about = "Online decentralized dual descent: simulate, solve, certify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory.csv, bounds.csv, summary.json and meta.json.
    Run(RunArgs),
    /// Run the randomized certificate suite.
    Suite(SuiteArgs),
    /// Check a trace's realized capacity and utility drift against claimed bounds.
    ValidateTrace(ValidateArgs),
    /// Print the version.
    Version,
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: static-smoke, sec5 or drifting.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig, String> {
        match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::from_json_file(path).map_err(|e| e.to_string()),
            (None, Some(name)) => RunConfig::preset(name).map_err(|e| e.to_string()),
            (None, None) => Err(format!("pass --config PATH or --preset NAME ({})", PRESETS.join(", "))),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    DualDescent,
    PaperLiteral,
}

impl From<SignArg> for SignConvention {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::DualDescent => SignConvention::DualDescent,
            SignArg::PaperLiteral => SignConvention::Reversed,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory [default: out/<config name>].
    #[arg(long, env = "OD3_OUT")]
    out: Option<PathBuf>,
    /// Step size: proven-max, paper-1overN or a positive number. Overrides the config.
    #[arg(long)]
    eta: Option<String>,
    /// Price update sign. Overrides the config.
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    /// Seed for drifting targets, synthetic capacities and probes. Overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Number of randomized configurations.
    #[arg(long, default_value_t = 100)]
    seeds: usize,
    /// Seed of the first configuration.
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    /// Steps per configuration.
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    /// Output directory for summary.json [default: out/suite].
    #[arg(long, env = "OD3_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    source: Source,
    /// Capacity CSV to check instead of a configuration.
    #[arg(long, conflicts_with_all = ["config", "preset"])]
    csv: Option<PathBuf>,
    /// Capacity columns of --csv, comma separated.
    #[arg(long, value_delimiter = ',', requires = "csv")]
    columns: Vec<String>,
    /// Claimed capacity drift bound [default: the configuration's].
    #[arg(long)]
    gamma: Option<f64>,
    /// Claimed utility-gradient drift bound [default: the configuration's].
    #[arg(long)]
    alpha: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Suite(args) => suite(args),
        Command::ValidateTrace(args) => validate(args),
        Command::Version => {
            println!("od3 {}", env!("CARGO_PKG_VERSION"));
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(args: RunArgs) -> Result<bool, String> {
    let mut config = args.source.load()?;
    if let Some(eta) = &args.eta {
        config.eta = eta.parse::<EtaChoice>().map_err(|e| e.to_string())?;
    }
    if let Some(sign) = args.sign {
        config.sign = sign.into();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| Path::new("out").join(&config.name));
    let outcome = experiment::run_experiment(&config, Some(&out)).map_err(|e| e.to_string())?;
    let meta = outcome.meta();
    println!(
        "{}: T={} N={} R={} eta={} (proven max {:.6}, in range: {}) c={:.6} b={:.6}",
        config.name,
        meta.horizon,
        config.n_users,
        config.n_suppliers,
        meta.eta,
        meta.eta_max,
        meta.eta_in_proven_range,
        meta.c,
        meta.b
    );
    for (bound, s) in outcome.report.summary() {
        let status = if s.all_passed() { "ok" } else { "FAIL" };
        let note = match (s.reference, s.flagged) {
            (true, _) => " (reference)",
            (false, f) if f > 0 => " (out of regime)",
            _ => "",
        };
        println!("  {:<32} {status:<4} {}/{}{note}", bound.name(), s.passed, s.rows - s.flagged);
    }
    println!("artifacts in {}", out.display());
    Ok(outcome.certified())
}

fn suite(args: SuiteArgs) -> Result<bool, String> {
    let options = SuiteOptions {
        seeds: args.seeds,
        base_seed: args.base_seed,
        horizon: args.horizon,
        ..SuiteOptions::default()
    };
    let outcome = experiment::run_suite(&options).map_err(|e| e.to_string())?;
    print!("{}", outcome.table());
    for run in outcome.runs.iter().filter(|r| !r.certified) {
        eprintln!(
            "counterexample: seed={} N={} R={} gamma={} alpha={} eta={}",
            run.seed, run.n_users, run.n_suppliers, run.gamma, run.alpha, run.eta
        );
        for row in &run.failures {
            eprintln!("  {row:?}");
        }
    }
    let out = args.out.unwrap_or_else(|| Path::new("out").join("suite"));
    outcome.write_json(&out).map_err(|e| e.to_string())?;
    println!("summary in {}", out.join("summary.json").display());
    Ok(outcome.certified)
}

fn validate(args: ValidateArgs) -> Result<bool, String> {
    let checks = if let Some(csv) = &args.csv {
        let series = traces::ingest_capacity_csv(csv, &args.columns).map_err(|e| e.to_string())?;
        let gamma = args.gamma.ok_or("--gamma is required with --csv")?;
        vec![("gamma", series.check_gamma(gamma))]
    } else {
        let config = args.source.load()?;
        let (trace, _) = config.build_trace().map_err(|e| e.to_string())?;
        let gamma = args
            .gamma
            .or(trace.declared_gamma)
            .ok_or("the configuration declares no capacity drift bound; pass --gamma")?;
        let alpha = args.alpha.or(trace.declared_alpha).unwrap_or(0.0);
        let report = traces::validate_trace(&trace, gamma, alpha);
        vec![("gamma", report.gamma), ("alpha", report.alpha)]
    };
    for (name, check) in &checks {
        println!(
            "{name}: claimed {} realized {} at step {}{} -> {}",
            check.claimed,
            check.realized,
            check.worst_step.map_or("-".to_string(), |t| t.to_string()),
            check.worst_user.map(|u| format!(" user {u}")).unwrap_or_default(),
            if check.pass { "ok" } else { "VIOLATED" }
        );
    }
    Ok(checks.iter().all(|(_, c)| c.pass))
}
