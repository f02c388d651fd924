//! Paired welfare comparisons: club versus disbanded club, the effect of a
//! club on outsiders, and utility equivalence with a stochastic environment.

use sha2::{Digest, Sha256};

use crate::bid_engine::BidEngine;
use crate::environment::{hex, AuctionInstance, EnvironmentConfig, EnvironmentSampler};
use crate::error::{Error, Result};
use crate::experiments::report::ExperimentReport;
use crate::experiments::simulate::ProtocolSimulator;
use crate::experiments::{interior_grid, rare_event_allowance, MIN_MONTE_CARLO_TRIALS, SIGNIFICANCE};
use crate::mechanisms::{run_first_price, AgentId, Bid, CrnEstimator, PaymentRule, StochasticCountBid};
use crate::rng::trial_rng;

/// Margin an exact strict inequality between bids must clear.
pub const EXACT_MARGIN: f64 = 1e-9;

/// Hashes the valuation profile of every trial so paired scenarios can prove
/// they saw the same draws.
#[derive(Default)]
struct PairingDigest(Sha256);

impl PairingDigest {
    fn add(&mut self, instance: &AuctionInstance) {
        for a in &instance.agents {
            self.0.update(a.value.to_le_bytes());
        }
        self.0.update([0xff]);
    }

    fn finish(self) -> String {
        hex(&self.0.finalize())
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_MONTE_CARLO_TRIALS {
        return Err(Error::invalid(format!("welfare comparisons need at least {MIN_MONTE_CARLO_TRIALS} trials")));
    }
    Ok(())
}

fn check_club_size(config: &EnvironmentConfig, k: usize, min: usize) -> Result<()> {
    if k < min || k > config.club_sizes.kappa() {
        return Err(Error::invalid(format!("club size {k} outside {min}..={}", config.club_sizes.kappa())));
    }
    Ok(())
}

/// Paired run of `instance` and a modified copy; returns the focal agent's
/// utility in both.
fn paired_focal_utilities(
    sim: &ProtocolSimulator,
    instance: &AuctionInstance,
    modified: &AuctionInstance,
    focal: AgentId,
    seed: u64,
    t: u64,
) -> Result<(f64, f64)> {
    // tie-breaking streams differ from the draw stream but match across scenarios
    let a = sim.run(instance, &mut trial_rng(seed ^ 0x7e5, t))?;
    let b = sim.run(modified, &mut trial_rng(seed ^ 0x7e5, t))?;
    Ok((a.utility(focal), b.utility(focal)))
}

/// A focal agent in a size-`k` club against the same agents with the club
/// disbanded (its members bidding directly, raising the announcement by `k - 1`).
pub fn compare_club_vs_disbanded(
    config: &EnvironmentConfig,
    engine: &BidEngine,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    check_club_size(config, k, 2)?;
    let mut report = ExperimentReport::new("club-vs-disbanded", seed, trials);
    let f = &config.valuations;
    for (n, _) in config.coordinator_counts.iter() {
        let disbanded = config.club_sizes.compose(n + k - 1, 1)?;
        let club = config.club_sizes.compose(n, k)?;
        let mut worst = f64::INFINITY;
        for v in interior_grid(f, 50) {
            worst = worst.min(engine.bid(v, &disbanded)? - engine.bid(v, &club)?);
        }
        report.push_exact(
            format!("exact n={n} k={k}"),
            "min b(v,P^{n+k-1,1}) - b(v,P^{n,k})",
            worst,
            worst > EXACT_MARGIN,
        );
    }

    let sim = ProtocolSimulator::new(engine.clone(), config);
    let sampler = EnvironmentSampler::new(config);
    let mut est = CrnEstimator::new(2, 1);
    let (mut pair_a, mut pair_b) = (PairingDigest::default(), PairingDigest::default());
    for t in 0..trials {
        let inst = sampler.sample_with_leading(&[k], &mut trial_rng(seed, t));
        let split = inst.disband(0)?;
        pair_a.add(&inst);
        pair_b.add(&split);
        let (u_club, u_split) = paired_focal_utilities(&sim, &inst, &split, AgentId(0), seed, t)?;
        est.record(&[u_club, u_split]);
    }
    let e = est.estimates();
    report.push("club", "focal utility", e[0].mean, e[0].stderr, true);
    report.push("disbanded", "focal utility", e[1].mean, e[1].stderr, true);
    report.push("club - disbanded", "utility difference", e[0].gain, e[0].gain_stderr, e[0].gain > 3.0 * e[0].gain_stderr);
    push_pairing(&mut report, pair_a.finish(), pair_b.finish());
    Ok(report)
}

/// A focal singleton with a size-`k` club present against the same agents
/// with that club disbanded.
pub fn compare_nonmember_welfare(
    config: &EnvironmentConfig,
    engine: &BidEngine,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    check_club_size(config, k, 1)?;
    let mut report = ExperimentReport::new("nonmember-welfare", seed, trials);
    let f = &config.valuations;
    if k >= 2 {
        for (n, _) in config.coordinator_counts.iter() {
            let with_club = config.club_sizes.compose(n, 1)?;
            let disbanded = config.club_sizes.compose(n + k - 1, 1)?;
            let mut worst = f64::INFINITY;
            for v in interior_grid(f, 50) {
                worst = worst.min(engine.bid(v, &disbanded)? - engine.bid(v, &with_club)?);
            }
            report.push_exact(
                format!("exact n={n} k={k}"),
                "min b(v,P^{n+k-1,1}) - b(v,P^{n,1})",
                worst,
                worst > EXACT_MARGIN,
            );
        }
    }

    let sim = ProtocolSimulator::new(engine.clone(), config);
    let sampler = EnvironmentSampler::new(config);
    let mut est = CrnEstimator::new(2, 1);
    let (mut pair_a, mut pair_b) = (PairingDigest::default(), PairingDigest::default());
    for t in 0..trials {
        let inst = sampler.sample_with_leading(&[1, k], &mut trial_rng(seed, t));
        let split = inst.disband(1)?;
        pair_a.add(&inst);
        pair_b.add(&split);
        let (u_with, u_without) = paired_focal_utilities(&sim, &inst, &split, AgentId(0), seed, t)?;
        est.record(&[u_with, u_without]);
    }
    let e = est.estimates();
    report.push("club present", "singleton utility", e[0].mean, e[0].stderr, true);
    report.push("club disbanded", "singleton utility", e[1].mean, e[1].stderr, true);
    let pass = if k == 1 { e[0].gain == 0.0 } else { e[0].gain > 3.0 * e[0].gain_stderr };
    report.push("present - disbanded", "utility difference", e[0].gain, e[0].gain_stderr, pass);
    push_pairing(&mut report, pair_a.finish(), pair_b.finish());
    Ok(report)
}

/// Number of equal-probability value buckets in the equivalence check.
pub const VALUE_BUCKETS: usize = 10;

/// Allowance for rounding when a paired difference is identically zero in
/// exact arithmetic.
const ROUNDING: f64 = 1e-12;

/// Utility of a focal member of a size-`k` club with exactly `n` potential
/// coordinators, against the same agents in an environment without
/// coordinators whose agent count follows `P^{n,k}`.
///
/// Two baselines are paired with the club path:
/// `stochastic bids`: everybody bids the engine's bid for `P^{n,k}`;
/// `known count`: everybody bids `b(v, m)` for the realized count `m`, whose
/// expected utility is the equilibrium utility of the stochastic environment.
///
/// Differences are reported for [`VALUE_BUCKETS`] equal-probability buckets of
/// the focal value. Wins against many bidders are rare in low buckets, so each
/// bucket's tolerance adds the [`rare_event_allowance`] for its value range,
/// and the club path's total payment is checked against the
/// stochastic bid on a 50-point value grid.
pub fn verify_utility_equivalence(
    config: &EnvironmentConfig,
    engine: &BidEngine,
    k: usize,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    check_club_size(config, k, 1)?;
    if n < 2 {
        return Err(Error::invalid("need at least two potential coordinators"));
    }
    let f = &config.valuations;
    let counts = config.club_sizes.compose(n, k)?;
    let sim = ProtocolSimulator::new(engine.clone(), config);
    let prop_rule = StochasticCountBid { engine: engine.clone(), counts: counts.clone() };
    let mut report = ExperimentReport::new("utility-equivalence", seed, trials);

    let mut worst = 0.0f64;
    for v in interior_grid(f, 50) {
        let lo = f.support_lo();
        let mut sizes = vec![k];
        sizes.extend(std::iter::repeat_n(1, n - 1));
        let mut values = vec![v];
        values.extend(std::iter::repeat_n(lo, k - 1 + n - 1));
        let inst = AuctionInstance::from_club_sizes(&sizes, values)?;
        let rec = sim.run(&inst, &mut trial_rng(seed, 0))?;
        let paid = rec.outcome.paid_to_center(AgentId(0)) + rec.outcome.paid_to_coordinator(AgentId(0));
        if rec.outcome.winner != Some(AgentId(0)) {
            return Err(Error::PreconditionViolation(format!("focal agent at {v} did not win the payment probe")));
        }
        worst = worst.max((paid - prop_rule.payment(v, n, None)?).abs());
    }
    report.push_exact(format!("payment identity n={n} k={k}"), "max |club payment - stochastic bid|", worst, worst <= 1e-9);

    let sampler = EnvironmentSampler::new(config);
    let mut buckets: Vec<CrnEstimator> = (0..VALUE_BUCKETS).map(|_| CrnEstimator::new(3, 0)).collect();
    let mut pair_a = PairingDigest::default();
    let mut pair_b = PairingDigest::default();
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let inst = sampler.sample_with_fixed(&[k], n, &mut rng);
        let flat = inst.flatten();
        pair_a.add(&inst);
        pair_b.add(&flat);
        let u_club = sim.run(&inst, &mut rng)?.utility(AgentId(0));
        let m = flat.total_agents();
        let stochastic: Vec<Bid> = flat
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| Bid::new(AgentId(i), engine.bid(a.value, &counts)?))
            .collect::<Result<_>>()?;
        let known: Vec<Bid> = flat
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| Bid::new(AgentId(i), engine.equilibrium_bid_fixed(a.value, m)?))
            .collect::<Result<_>>()?;
        let v = flat.agents[0].value;
        let focal = |bids: &[Bid], rng: &mut _| -> Result<f64> {
            let out = run_first_price(bids, rng)?;
            Ok(if out.winner == Some(AgentId(0)) { v - out.paid_to_center(AgentId(0)) } else { 0.0 })
        };
        let u_stochastic = focal(&stochastic, &mut rng)?;
        let u_known = focal(&known, &mut rng)?;
        let bucket = ((f.cdf(v) * VALUE_BUCKETS as f64) as usize).min(VALUE_BUCKETS - 1);
        buckets[bucket].record(&[u_club, u_stochastic, u_known]);
    }
    for (b, est) in buckets.iter().enumerate() {
        let e = est.estimates();
        let scenario = format!("bucket {b} n={n} k={k}");
        report.push(&scenario, "club utility", e[0].mean, e[0].stderr, true);
        // Utilities in this bucket lie in [0, top - min(lo, 0)].
        let top = f.inverse_cdf((b + 1) as f64 / VALUE_BUCKETS as f64);
        let allowance = rare_event_allowance(top - f.support_lo().min(0.0), est.trials());
        for (i, name) in [(1, "stochastic bids - club"), (2, "known count - club")] {
            let pass = e[i].gain.abs() <= SIGNIFICANCE * e[i].gain_stderr + allowance + ROUNDING;
            report.push(&scenario, name, e[i].gain, e[i].gain_stderr, pass);
        }
    }
    push_pairing(&mut report, pair_a.finish(), pair_b.finish());
    Ok(report)
}

fn push_pairing(report: &mut ExperimentReport, a: String, b: String) {
    report.note(format!("pairing digest {a}"));
    if a != b {
        report.violations.push(format!("scenarios saw different draws: {a} vs {b}"));
    }
}
