//! Command-line front end: `bidclub <experiment> [--config PATH] [--seed N]
//! [--trials N] [--out PATH]`.
//!
//! Exit codes: 0 when every check passes, 1 on any violation, 2 for
//! configuration errors, 3 for I/O failures.

mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use config::{load_config, parse_config, ConfigError, Experiment, LoadError, RunConfig, TableModel};

use crate::error::Error;
use crate::environment::EnvironmentSampler;
use crate::experiments::{self, DeviatorSpec, ExperimentReport, ProtocolSimulator};
use crate::rng::trial_rng;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bidclub", about = "Bidding-club equilibrium and welfare experiments")]
pub struct Args {
    /// equilibrium, club-vs-disbanded, nonmember-welfare, utility-equivalence,
    /// revenue, dominance-check or bid-table
    pub experiment: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trial count in the config file.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Report(ExperimentReport),
    /// Bid-table CSV.
    Table(String),
}

impl RunOutput {
    pub fn body(&self) -> String {
        match self {
            RunOutput::Report(r) => r.render(),
            RunOutput::Table(t) => t.clone(),
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            RunOutput::Report(r) => r.passed(),
            RunOutput::Table(_) => true,
        }
    }
}

/// Failure of a run, mapped to an exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Runs the configured experiment in memory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let env = &cfg.environment;
    let engine = cfg.engine();
    let mut report = match cfg.experiment {
        Experiment::BidTable => return Ok(RunOutput::Table(bid_table(cfg)?)),
        Experiment::Equilibrium => {
            let spec = DeviatorSpec {
                bid_points: cfg.bid_points,
                misreport_points: cfg.misreport_points,
                ..DeviatorSpec::standard(env)
            };
            experiments::verify_equilibrium(env, &engine, &spec, cfg.trials, cfg.seed)?
        }
        Experiment::ClubVsDisbanded => {
            experiments::compare_club_vs_disbanded(env, &engine, cfg.club_size, cfg.trials, cfg.seed)?
        }
        Experiment::NonmemberWelfare => {
            experiments::compare_nonmember_welfare(env, &engine, cfg.club_size, cfg.trials, cfg.seed)?
        }
        Experiment::UtilityEquivalence => {
            experiments::verify_utility_equivalence(env, &engine, cfg.club_size, cfg.announced, cfg.trials, cfg.seed)?
        }
        Experiment::Revenue => experiments::revenue_accounting(env, &engine, cfg.trials, cfg.seed)?,
        Experiment::DominanceCheck => {
            let mut r = experiments::dominance_check(env, &engine)?;
            r.seed = cfg.seed;
            r
        }
    };
    report.config_digest = cfg.digest();
    Ok(RunOutput::Report(report))
}

/// Bid table as CSV with columns `v,model,bid`, one row per grid value and
/// model, numbers at 12 significant digits.
pub fn bid_table(cfg: &RunConfig) -> Result<String, RunError> {
    let engine = cfg.engine();
    let f = &cfg.environment.valuations;
    let (lo, hi) = (f.support_lo(), f.support_hi());
    let mut out = String::from("v,model,bid\n");
    let models: Vec<(String, crate::bid_engine::CountModel)> = cfg
        .table_models
        .iter()
        .map(|m| -> Result<_, Error> {
            let model = match *m {
                TableModel::Fixed(n) => crate::bid_engine::CountModel::Fixed(n),
                TableModel::Posterior { n, k } => {
                    crate::bid_engine::CountModel::Stochastic(cfg.environment.club_sizes.compose(n, k)?)
                }
            };
            Ok((m.label(), model))
        })
        .collect::<Result<_, _>>()?;
    let points = cfg.grid_points;
    for i in 0..points {
        let v = if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
        for (label, model) in &models {
            let b = engine.bid_for(v, model)?;
            let _ = writeln!(out, "{},{},{}", significant(v), label, significant(b));
        }
    }
    Ok(out)
}

/// `x` rounded to 12 significant digits, without trailing zeros.
pub fn significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// JSON lines of the first `limit` full-protocol trials drawn with `seed`.
pub fn trace_lines(cfg: &RunConfig) -> Result<String, RunError> {
    let sim = ProtocolSimulator::new(cfg.engine(), &cfg.environment);
    let sampler = EnvironmentSampler::new(&cfg.environment);
    let mut out = String::new();
    for t in 0..cfg.trace_limit.min(cfg.trials) {
        let mut rng = trial_rng(cfg.seed, t);
        let inst = sampler.sample(&mut rng);
        let rec = sim.run(&inst, &mut rng)?;
        let line = serde_json::to_string(&rec).map_err(|e| RunError::Io(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn write_file(path: &Path, body: &str) -> Result<(), RunError> {
    std::fs::write(path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

/// Runs a configuration, writes its outputs and returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = execute(cfg).and_then(|output| {
        let body = output.body();
        match &cfg.output {
            Some(path) => write_file(path, &body)?,
            None => print!("{body}"),
        }
        if let RunOutput::Report(r) = &output {
            if cfg.output.is_some() {
                print!("{}", r.summary());
            }
        }
        if let Some(path) = &cfg.trace {
            write_file(path, &trace_lines(cfg)?)?;
        }
        Ok(output.passed())
    });
    let _ = std::io::stdout().flush();
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_VIOLATION,
        Err(e) => {
            eprintln!("bidclub: {e}");
            e.exit_code()
        }
    }
}

/// Builds the run configuration from parsed arguments.
pub fn resolve(args: &Args) -> Result<RunConfig, RunError> {
    let experiment: Experiment = args.experiment.parse().map_err(|e: ConfigError| RunError::Config(e.to_string()))?;
    let mut cfg = match &args.config {
        Some(path) => load_config(path, Some(experiment)).map_err(|e| match e {
            LoadError::Io(m) => RunError::Io(m),
            LoadError::Config(m) => RunError::Config(m),
        })?,
        None => RunConfig::reference(experiment),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials < 1 {
            return Err(RunError::Config("trials must be >= 1".into()));
        }
        cfg.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

/// Entry point shared by the binary: parse, resolve, run.
pub fn main_with(args: Args) -> i32 {
    match resolve(&args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("bidclub: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.4), "0.4");
        assert_eq!(significant(0.0), "0");
        assert_eq!(significant(2.0 / 3.0), "0.666666666667");
        assert_eq!(significant(123.456789012345), "123.456789012");
        assert_eq!(significant(1e-5 / 3.0), "0.00000333333333333");
    }

    #[test]
    fn reference_bid_table() {
        let cfg = RunConfig::reference(Experiment::BidTable);
        let table = bid_table(&cfg).unwrap();
        let rows: Vec<&str> = table.lines().skip(1).collect();
        assert_eq!(rows.len(), 404);
        assert!(rows.contains(&"0.6,n=3,0.4"));
        assert!(rows.contains(&"0,n=5,0"));
        assert_eq!(table.lines().next(), Some("v,model,bid"));
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let args = Args { experiment: "sealed".into(), config: None, seed: None, trials: None, out: None };
        assert_eq!(main_with(args), EXIT_CONFIG);
    }

    #[test]
    fn missing_config_file_is_io() {
        let args = Args {
            experiment: "revenue".into(),
            config: Some(PathBuf::from("/nonexistent/bidclub.cfg")),
            seed: None,
            trials: None,
            out: None,
        };
        assert_eq!(main_with(args), EXIT_IO);
    }

    #[test]
    fn too_few_trials_is_a_config_error() {
        let mut cfg = RunConfig::reference(Experiment::Revenue);
        cfg.trials = 10;
        assert!(matches!(execute(&cfg), Err(RunError::Config(_))));
    }
}
