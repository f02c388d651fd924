//! Run configuration files.
//!
//! ```text
//! # comments start with '#'
//! experiment = equilibrium
//! trials = 1000000
//! seed = 7
//! valuations = uniform          # or: uniform 2 5 | power 3
//! kappa = 2
//!
//! [gamma_A]
//! 1 0.5
//! 2 0.5
//!
//! [gamma_C]
//! 2 0.5
//! 3 0.5
//! ```
//!
//! Lines with `=` are settings; other lines belong to the last pmf section
//! and hold a count and its probability.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::bid_engine::{BidEngine, MixtureRule};
use crate::distributions::{ClubSizeDistribution, CountDistribution, ValuationDistribution};
use crate::environment::{hex, EnvironmentConfig};

/// Experiments reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Equilibrium,
    ClubVsDisbanded,
    NonmemberWelfare,
    UtilityEquivalence,
    Revenue,
    DominanceCheck,
    BidTable,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Equilibrium,
        Experiment::ClubVsDisbanded,
        Experiment::NonmemberWelfare,
        Experiment::UtilityEquivalence,
        Experiment::Revenue,
        Experiment::DominanceCheck,
        Experiment::BidTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Equilibrium => "equilibrium",
            Experiment::ClubVsDisbanded => "club-vs-disbanded",
            Experiment::NonmemberWelfare => "nonmember-welfare",
            Experiment::UtilityEquivalence => "utility-equivalence",
            Experiment::Revenue => "revenue",
            Experiment::DominanceCheck => "dominance-check",
            Experiment::BidTable => "bid-table",
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            ConfigError::new(None, format!("unknown experiment '{s}', expected one of: {}", names.join(", ")))
        })
    }
}

/// A configuration problem, with the offending line when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError { line, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A bid-table column: `b(v, n)` for fixed `n`, or `b(v, P^{n,k})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableModel {
    Fixed(usize),
    Posterior { n: usize, k: usize },
}

impl TableModel {
    pub fn label(self) -> String {
        match self {
            TableModel::Fixed(n) => format!("n={n}"),
            TableModel::Posterior { n, k } => format!("P^{{{n},{k}}}"),
        }
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub environment: EnvironmentConfig,
    pub rule: MixtureRule,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Points of the bid-table value grid.
    pub grid_points: usize,
    pub bid_points: usize,
    pub misreport_points: usize,
    /// Club size for the welfare experiments.
    pub club_size: usize,
    /// Number of potential coordinators for the equivalence experiment.
    pub announced: usize,
    pub table_models: Vec<TableModel>,
    pub trace: Option<PathBuf>,
    pub trace_limit: u64,
}

impl RunConfig {
    /// Reference environment with default settings.
    pub fn reference(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            environment: EnvironmentConfig::reference(),
            rule: MixtureRule::default(),
            trials: 1_000_000,
            seed: 1,
            output: None,
            grid_points: 101,
            bid_points: 256,
            misreport_points: 64,
            club_size: 2,
            announced: 2,
            table_models: (2..=5).map(TableModel::Fixed).collect(),
            trace: None,
            trace_limit: 100,
        }
    }

    pub fn engine(&self) -> BidEngine {
        BidEngine::new(self.environment.valuations.clone(), self.rule)
    }

    /// Canonical text of every setting that affects results.
    pub fn canonical(&self) -> String {
        let env = &self.environment;
        let pmf = |p: &CountDistribution| {
            p.iter().map(|(c, q)| format!("{c} {q:e}")).collect::<Vec<_>>().join("; ")
        };
        let models: Vec<String> = self.table_models.iter().map(|m| m.label()).collect();
        format!(
            "experiment={}\nvaluations={}\ngamma_C={}\ngamma_A={}\nkappa={}\nidentity_enforcement={}\n\
             bid_rule={}\ntrials={}\nseed={}\ngrid_points={}\nbid_grid={}\nmisreport_grid={}\nclub_size={}\n\
             announced={}\nbid_models={}\n",
            self.experiment.name(),
            env.valuations.describe(),
            pmf(&env.coordinator_counts),
            pmf(env.club_sizes.sizes()),
            env.club_sizes.kappa(),
            env.identity_enforcement,
            self.rule.name(),
            self.trials,
            self.seed,
            self.grid_points,
            self.bid_points,
            self.misreport_points,
            self.club_size,
            self.announced,
            models.join(","),
        )
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(Some(line), format!("{key}: cannot parse '{value}'")))
}

fn parse_valuations(line: usize, value: &str) -> Result<ValuationDistribution, ConfigError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let err = |m: String| ConfigError::new(Some(line), format!("valuations: {m}"));
    match parts.as_slice() {
        ["uniform"] => Ok(crate::distributions::uniform_valuations()),
        ["uniform", lo, hi] => {
            ValuationDistribution::uniform_on(parse_num(line, "valuations", lo)?, parse_num(line, "valuations", hi)?)
                .map_err(|e| err(e.to_string()))
        }
        ["power", a] => ValuationDistribution::power(parse_num(line, "valuations", a)?).map_err(|e| err(e.to_string())),
        _ => Err(err(format!("expected 'uniform', 'uniform LO HI' or 'power ALPHA', got '{value}'"))),
    }
}

fn parse_table_models(line: usize, value: &str) -> Result<Vec<TableModel>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| match item.split_once(':') {
            None => Ok(TableModel::Fixed(parse_num(line, "bid_models", item)?)),
            Some((n, k)) => Ok(TableModel::Posterior {
                n: parse_num(line, "bid_models", n.trim())?,
                k: parse_num(line, "bid_models", k.trim())?,
            }),
        })
        .collect()
}

/// Parses configuration text. A requested `experiment` overrides the default
/// and must agree with an `experiment` setting in the text.
pub fn parse_config(text: &str, experiment: Option<Experiment>) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::reference(experiment.unwrap_or(Experiment::Equilibrium));
    let mut named: Option<(usize, Experiment)> = None;
    let mut pmfs: BTreeMap<String, (usize, Vec<(usize, f64)>)> = BTreeMap::new();
    let mut section: Option<String> = None;
    let mut kappa: Option<(usize, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if name != "gamma_A" && name != "gamma_C" {
                return Err(ConfigError::new(Some(line), format!("unknown section [{name}], expected [gamma_A] or [gamma_C]")));
            }
            if pmfs.contains_key(&name) {
                return Err(ConfigError::new(Some(line), format!("section [{name}] appears twice")));
            }
            pmfs.insert(name.clone(), (line, Vec::new()));
            section = Some(name);
            continue;
        }
        if let Some((key, value)) = content.split_once('=') {
            let (key, value) = (key.trim(), value.trim());
            match key {
                "experiment" => named = Some((line, value.parse().map_err(|e: ConfigError| ConfigError::new(Some(line), e.message))?)),
                "trials" => cfg.trials = parse_num(line, key, value)?,
                "seed" => cfg.seed = parse_num(line, key, value)?,
                "valuations" => cfg.environment.valuations = parse_valuations(line, value)?,
                "kappa" => kappa = Some((line, parse_num(line, key, value)?)),
                "identity_enforcement" => cfg.environment.identity_enforcement = parse_num(line, key, value)?,
                "bid_rule" => {
                    cfg.rule = MixtureRule::parse(value).ok_or_else(|| {
                        ConfigError::new(Some(line), format!("bid_rule: expected 'win-weighted' or 'count-weighted', got '{value}'"))
                    })?
                }
                "grid_points" => cfg.grid_points = parse_num(line, key, value)?,
                "bid_grid" => cfg.bid_points = parse_num(line, key, value)?,
                "misreport_grid" => cfg.misreport_points = parse_num(line, key, value)?,
                "club_size" => cfg.club_size = parse_num(line, key, value)?,
                "announced" => cfg.announced = parse_num(line, key, value)?,
                "bid_models" => cfg.table_models = parse_table_models(line, value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "trace" => cfg.trace = Some(PathBuf::from(value)),
                "trace_limit" => cfg.trace_limit = parse_num(line, key, value)?,
                _ => return Err(ConfigError::new(Some(line), format!("unknown setting '{key}'"))),
            }
            continue;
        }
        let Some(name) = &section else {
            return Err(ConfigError::new(Some(line), format!("expected 'key = value' or a section header, got '{content}'")));
        };
        let parts: Vec<&str> = content.split_whitespace().collect();
        let [count, prob] = parts.as_slice() else {
            return Err(ConfigError::new(Some(line), format!("[{name}]: expected 'count probability', got '{content}'")));
        };
        let entry = (parse_num(line, name, count)?, parse_num(line, name, prob)?);
        pmfs.get_mut(name).expect("section registered").1.push(entry);
    }

    if let Some((line, e)) = named {
        match experiment {
            Some(sub) if sub != e => {
                return Err(ConfigError::new(
                    Some(line),
                    format!("config names experiment '{}' but '{}' was requested", e.name(), sub.name()),
                ))
            }
            _ => cfg.experiment = e,
        }
    }

    let build = |name: &str| -> Result<Option<(usize, CountDistribution)>, ConfigError> {
        match pmfs.get(name) {
            None => Ok(None),
            Some((line, pairs)) => CountDistribution::from_pairs(pairs)
                .map(|p| Some((*line, p)))
                .map_err(|e| ConfigError::new(Some(*line), format!("{name}: {e}"))),
        }
    };
    let env = &mut cfg.environment;
    let (sizes_line, sizes) = match build("gamma_A")? {
        Some((l, p)) => (Some(l), p),
        None => (None, env.club_sizes.sizes().clone()),
    };
    let kappa_value = kappa.map(|(_, k)| k).unwrap_or(sizes.max_count().max(2));
    env.club_sizes = ClubSizeDistribution::new(sizes, kappa_value)
        .map_err(|e| ConfigError::new(sizes_line.or(kappa.map(|(l, _)| l)), format!("gamma_A: {e}")))?;
    let (coord_line, coords) = match build("gamma_C")? {
        Some((l, p)) => (Some(l), p),
        None => (None, env.coordinator_counts.clone()),
    };
    *env = EnvironmentConfig::new(coords, env.club_sizes.clone(), env.valuations.clone(), env.identity_enforcement)
        .map_err(|e| ConfigError::new(coord_line, format!("gamma_C: {e}")))?;

    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let fail = |m: String| Err(ConfigError::new(None, m));
    if cfg.trials < 1 {
        return fail("trials must be >= 1".into());
    }
    if cfg.grid_points < 2 {
        return fail("grid_points must be >= 2".into());
    }
    if cfg.bid_points < 2 || cfg.misreport_points < 2 {
        return fail("bid_grid and misreport_grid must be >= 2".into());
    }
    let kappa = cfg.environment.club_sizes.kappa();
    if cfg.club_size < 1 || cfg.club_size > kappa {
        return fail(format!("club_size must be in 1..={kappa}"));
    }
    if cfg.announced < 2 {
        return fail("announced must be >= 2".into());
    }
    for m in &cfg.table_models {
        let ok = match *m {
            TableModel::Fixed(n) => n >= 1,
            TableModel::Posterior { n, k } => n >= 2 && (1..=kappa).contains(&k),
        };
        if !ok {
            return fail(format!("bid_models entry {} is not a valid count model", m.label()));
        }
    }
    Ok(())
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path, experiment: Option<Experiment>) -> Result<RunConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, experiment).map_err(|e| LoadError::Config(format!("{}: {e}", path.display())))
}

/// Failure to load a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    Io(String),
    Config(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(m) | LoadError::Config(m) => f.write_str(m),
        }
    }
}
