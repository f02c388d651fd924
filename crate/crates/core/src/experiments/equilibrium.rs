//! Deviation search against the club equilibrium.

use std::collections::BTreeMap;

use crate::bid_engine::BidEngine;
use crate::club_protocol::false_name_deviation_scenario;
use crate::distributions::CountDistribution;
use crate::environment::{EnvironmentConfig, EnvironmentSampler};
use crate::error::{Error, Result};
use crate::experiments::report::ExperimentReport;
use crate::experiments::MIN_MONTE_CARLO_TRIALS;
use crate::mechanisms::{action_grid, AgentId, first_price_utility, ActionEstimate, CrnEstimator};
use crate::rng::trial_rng;

/// Position of the deviator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviatorRole {
    Singleton,
    ClubMember { k: usize },
}

impl DeviatorRole {
    pub fn club_size(self) -> usize {
        match self {
            DeviatorRole::Singleton => 1,
            DeviatorRole::ClubMember { k } => k,
        }
    }

    pub fn label(self) -> String {
        match self {
            DeviatorRole::Singleton => "singleton".into(),
            DeviatorRole::ClubMember { k } => format!("member k={k}"),
        }
    }
}

/// Who deviates, at which values, and how finely deviations are searched.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviatorSpec {
    pub roles: Vec<DeviatorRole>,
    pub values: Vec<f64>,
    /// Direct-bid grid on `[0, support_hi]`.
    pub bid_points: usize,
    /// Declarations to the coordinator spanning the support.
    pub misreport_points: usize,
}

impl DeviatorSpec {
    /// Singletons and every club size up to `kappa`, values 0.1..0.9 of the
    /// support, 256 bids and 64 misreports.
    pub fn standard(config: &EnvironmentConfig) -> Self {
        let (lo, hi) = (config.valuations.support_lo(), config.valuations.support_hi());
        let mut roles = vec![DeviatorRole::Singleton];
        roles.extend((2..=config.club_sizes.kappa()).map(|k| DeviatorRole::ClubMember { k }));
        DeviatorSpec {
            roles,
            values: (1..=9).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect(),
            bid_points: 256,
            misreport_points: 64,
        }
    }
}

/// Gains above this many standard errors count as profitable deviations.
pub const SIGNIFICANCE: f64 = 3.0;

/// Slack for outcome changes too rare to appear in `trials` draws.
///
/// Two nearby bids differ only when the highest competing bid falls between
/// them. If that never happens in the sample, the sample standard error is
/// blind to it; an event of probability up to `3 / trials` can go unseen and
/// move a utility by at most `span`.
pub fn rare_event_allowance(span: f64, trials: u64) -> f64 {
    span * 3.0 / trials.max(1) as f64
}

fn significant_gain(e: &ActionEstimate, allowance: f64) -> bool {
    e.gain > 0.0 && e.gain > SIGNIFICANCE * e.gain_stderr + allowance
}

/// Largest utility magnitude reachable with bids in `[0, support_hi]`.
fn utility_span(config: &EnvironmentConfig) -> f64 {
    let f = &config.valuations;
    f.support_hi() - f.support_lo().min(0.0)
}

struct BeliefCache<'a> {
    config: &'a EnvironmentConfig,
    cache: BTreeMap<(usize, usize), CountDistribution>,
}

impl<'a> BeliefCache<'a> {
    fn new(config: &'a EnvironmentConfig) -> Self {
        BeliefCache { config, cache: BTreeMap::new() }
    }

    fn get(&mut self, n: usize, k: usize) -> Result<&CountDistribution> {
        if !self.cache.contains_key(&(n, k)) {
            let p = self.config.club_sizes.compose(n, k)?;
            self.cache.insert((n, k), p);
        }
        Ok(&self.cache[&(n, k)])
    }
}

/// Opponent draw shared by every deviator value.
struct Draw {
    announced: usize,
    best_other: f64,
    best_mate: f64,
}

/// Monte Carlo search for profitable deviations from the club equilibrium.
///
/// For every role and value the deviator's prescribed strategy is compared,
/// on common draws and separately for each announced count, with:
/// singletons: every direct bid on the grid and abstaining;
/// club members: every misreport to the coordinator, and declining the
/// invitation followed by every direct bid on the grid.
///
/// After a decline the remaining members are registered individually at
/// `b(μ, P^{n',k})` and everybody else bids as a singleton would for the
/// announced `n' = n + k - 1`. With identity enforcement off, the false-name
/// deviation is tested for club members as well.
pub fn verify_equilibrium(
    config: &EnvironmentConfig,
    engine: &BidEngine,
    spec: &DeviatorSpec,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if trials < MIN_MONTE_CARLO_TRIALS {
        return Err(Error::invalid(format!("equilibrium check needs at least {MIN_MONTE_CARLO_TRIALS} trials")));
    }
    if spec.bid_points < 2 || spec.misreport_points < 2 {
        return Err(Error::invalid("deviation grids need at least two points"));
    }
    let f = &config.valuations;
    for &v in &spec.values {
        if !f.contains(v) {
            return Err(Error::invalid(format!("deviator value {v} outside the valuation support")));
        }
    }
    let mut report = ExperimentReport::new("equilibrium", seed, trials);
    for (r, role) in spec.roles.iter().enumerate() {
        let k = role.club_size();
        if k > config.club_sizes.kappa() {
            return Err(Error::invalid(format!("club size {k} exceeds kappa {}", config.club_sizes.kappa())));
        }
        let role_seed = seed.wrapping_add(r as u64);
        match role {
            DeviatorRole::Singleton => singleton_search(config, engine, spec, trials, role_seed, &mut report)?,
            DeviatorRole::ClubMember { k } => member_search(config, engine, spec, *k, trials, role_seed, &mut report)?,
        }
    }
    if !config.identity_enforcement {
        let grid = action_grid(f.support_hi(), spec.bid_points);
        for role in &spec.roles {
            let DeviatorRole::ClubMember { k } = role else { continue };
            for &v in &spec.values {
                let est = false_name_deviation_scenario(v, *k, config, engine, &grid, trials, seed ^ 0xfa15e)?;
                let allowance = rare_event_allowance(utility_span(config), est.trials);
                let ok = !(est.gain > 0.0 && est.gain > SIGNIFICANCE * est.gain_stderr + allowance);
                report.push(format!("{} v={v} false-name", role.label()), "gain", est.gain, est.gain_stderr, ok);
            }
        }
    }
    Ok(report)
}

fn draw(sampler: &EnvironmentSampler, k: usize, seed: u64, t: u64) -> Draw {
    let mut rng = trial_rng(seed, t);
    let inst = sampler.sample_with_leading(&[k], &mut rng);
    let value = |m: &AgentId| inst.agent(*m).value;
    let best_mate = inst.clubs[0].members[1..].iter().map(value).fold(f64::NEG_INFINITY, f64::max);
    let best_other = inst.clubs[1..].iter().flat_map(|c| &c.members).map(value).fold(f64::NEG_INFINITY, f64::max);
    Draw { announced: inst.n_potential_coordinators(), best_other, best_mate }
}

/// Bid of the best agent in a group, or nothing if the group is empty.
fn group_bid(engine: &BidEngine, value: f64, counts: &CountDistribution) -> Result<f64> {
    if value == f64::NEG_INFINITY {
        Ok(f64::NEG_INFINITY)
    } else {
        engine.bid(value, counts)
    }
}

fn singleton_search(
    config: &EnvironmentConfig,
    engine: &BidEngine,
    spec: &DeviatorSpec,
    trials: u64,
    seed: u64,
    report: &mut ExperimentReport,
) -> Result<()> {
    let sampler = EnvironmentSampler::new(config);
    let mut beliefs = BeliefCache::new(config);
    let grid = action_grid(config.valuations.support_hi(), spec.bid_points);
    // actions: prescribed, abstain, grid
    let actions = 2 + grid.len();
    let counts: Vec<usize> = config.coordinator_counts.iter().map(|(n, _)| n).collect();
    let mut prescribed: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &n in &counts {
        let p = beliefs.get(n, 1)?.clone();
        prescribed.insert(n, spec.values.iter().map(|v| engine.bid(*v, &p)).collect::<Result<_>>()?);
    }
    let mut est: BTreeMap<(usize, usize), CrnEstimator> = BTreeMap::new();
    let mut u = vec![0.0; actions];
    for t in 0..trials {
        let d = draw(&sampler, 1, seed, t);
        let hcb = group_bid(engine, d.best_other, beliefs.get(d.announced, 1)?)?;
        for (i, &v) in spec.values.iter().enumerate() {
            u[0] = first_price_utility(v, prescribed[&d.announced][i], hcb);
            u[1] = 0.0;
            for (slot, &a) in u[2..].iter_mut().zip(&grid) {
                *slot = first_price_utility(v, a, hcb);
            }
            est.entry((i, d.announced)).or_insert_with(|| CrnEstimator::new(actions, 0)).record(&u);
        }
    }
    let span = utility_span(config);
    for ((i, n), e) in &est {
        let v = spec.values[*i];
        let allowance = rare_event_allowance(span, e.trials());
        let e = e.estimates();
        let scenario = format!("singleton v={v} n={n}");
        report.push(&scenario, "prescribed utility", e[0].mean, e[0].stderr, true);
        push_best(report, &scenario, "abstain gain", &e[1..2], allowance);
        push_best(report, &scenario, "best bid gain", &e[2..], allowance);
    }
    Ok(())
}

fn member_search(
    config: &EnvironmentConfig,
    engine: &BidEngine,
    spec: &DeviatorSpec,
    k: usize,
    trials: u64,
    seed: u64,
    report: &mut ExperimentReport,
) -> Result<()> {
    let f = &config.valuations;
    let sampler = EnvironmentSampler::new(config);
    let mut beliefs = BeliefCache::new(config);
    let grid = action_grid(f.support_hi(), spec.bid_points);
    let (lo, hi) = (f.support_lo(), f.support_hi());
    let m = spec.misreport_points;
    let misreports: Vec<f64> = (0..m).map(|j| lo + (hi - lo) * j as f64 / (m - 1) as f64).collect();
    // actions: truthful, misreports, decline + grid bid
    let actions = 1 + misreports.len() + grid.len();
    let decline_at = 1 + misreports.len();

    struct Tables {
        forwarded: Vec<f64>,
        club_price: Vec<f64>,
        truthful_forwarded: Vec<f64>,
        truthful_price: Vec<f64>,
    }
    let mut tables: BTreeMap<usize, Tables> = BTreeMap::new();
    for (n, _) in config.coordinator_counts.iter() {
        let p1 = beliefs.get(n, 1)?.clone();
        let pk = beliefs.get(n, k)?.clone();
        let bids = |xs: &[f64], p: &CountDistribution| xs.iter().map(|x| engine.bid(*x, p)).collect::<Result<Vec<_>>>();
        tables.insert(
            n,
            Tables {
                forwarded: bids(&misreports, &p1)?,
                club_price: bids(&misreports, &pk)?,
                truthful_forwarded: bids(&spec.values, &p1)?,
                truthful_price: bids(&spec.values, &pk)?,
            },
        );
    }

    let member_utility = |v: f64, declared: f64, forwarded: f64, price: f64, best_mate: f64, hcb: f64| {
        if declared > best_mate && forwarded > hcb {
            v - price
        } else {
            0.0
        }
    };
    let mut est: BTreeMap<(usize, usize), CrnEstimator> = BTreeMap::new();
    let mut u = vec![0.0; actions];
    for t in 0..trials {
        let d = draw(&sampler, k, seed, t);
        let n = d.announced;
        let hcb = group_bid(engine, d.best_other, beliefs.get(n, 1)?)?;
        // after a decline, n' = n + k - 1
        let n_decline = n + k - 1;
        let others_after = group_bid(engine, d.best_other, beliefs.get(n_decline, 1)?)?;
        let mates_after = group_bid(engine, d.best_mate, beliefs.get(n_decline, k)?)?;
        let decline_competition = others_after.max(mates_after);
        let tab = &tables[&n];
        for (i, &v) in spec.values.iter().enumerate() {
            u[0] = member_utility(v, v, tab.truthful_forwarded[i], tab.truthful_price[i], d.best_mate, hcb);
            for j in 0..misreports.len() {
                u[1 + j] = member_utility(v, misreports[j], tab.forwarded[j], tab.club_price[j], d.best_mate, hcb);
            }
            for (slot, &a) in u[decline_at..].iter_mut().zip(&grid) {
                *slot = first_price_utility(v, a, decline_competition);
            }
            est.entry((i, n)).or_insert_with(|| CrnEstimator::new(actions, 0)).record(&u);
        }
    }
    let span = utility_span(config);
    for ((i, n), e) in &est {
        let v = spec.values[*i];
        let allowance = rare_event_allowance(span, e.trials());
        let e = e.estimates();
        let scenario = format!("member k={k} v={v} n={n}");
        report.push(&scenario, "prescribed utility", e[0].mean, e[0].stderr, true);
        push_best(report, &scenario, "best misreport gain", &e[1..decline_at], allowance);
        push_best(report, &scenario, "best decline gain", &e[decline_at..], allowance);
    }
    Ok(())
}

/// Reports the largest gain in `estimates`; fails if any gain is significant.
fn push_best(report: &mut ExperimentReport, scenario: &str, statistic: &str, estimates: &[ActionEstimate], allowance: f64) {
    let best = estimates
        .iter()
        .copied()
        .reduce(|a, b| if b.gain > a.gain { b } else { a })
        .expect("nonempty action set");
    let ok = !estimates.iter().any(|e| significant_gain(e, allowance));
    report.push(scenario, statistic, best.gain, best.gain_stderr, ok);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bid_engine::MixtureRule;

    fn engine(config: &EnvironmentConfig) -> BidEngine {
        BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted)
    }

    #[test]
    fn too_few_trials_rejected() {
        let c = EnvironmentConfig::reference();
        let spec = DeviatorSpec::standard(&c);
        assert!(verify_equilibrium(&c, &engine(&c), &spec, 100, 1).is_err());
    }

    #[test]
    fn bottom_value_deviator_earns_nothing() {
        let c = EnvironmentConfig::reference();
        let spec = DeviatorSpec { values: vec![0.0], ..DeviatorSpec::standard(&c) };
        let r = verify_equilibrium(&c, &engine(&c), &spec, 10_000, 5).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        for row in &r.rows {
            if row.statistic == "prescribed utility" {
                assert_eq!(row.mean, 0.0);
            } else {
                assert!(row.mean <= 0.0, "{row:?}");
            }
        }
    }

    #[test]
    fn small_run_has_no_profitable_deviation() {
        let c = EnvironmentConfig::reference();
        let spec = DeviatorSpec { values: vec![0.3, 0.7], bid_points: 64, misreport_points: 16, ..DeviatorSpec::standard(&c) };
        let r = verify_equilibrium(&c, &engine(&c), &spec, 20_000, 11).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.rows.iter().any(|row| row.scenario.starts_with("member k=2")));
    }
}
