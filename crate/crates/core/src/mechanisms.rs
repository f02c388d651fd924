//! Auction mechanisms: classical first price, first price with participation
//! revelation, and the composed mechanism where every agent faces the common
//! highest-declaration allocation but a personal payment rule.
//!
//! Also home to the common-random-numbers machinery used for best-response
//! search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::bid_engine::BidEngine;
use crate::distributions::{ClubSizeDistribution, CountDistribution};
use crate::error::{Error, Result};
use crate::rng::{trial_rng, SimRng};

/// Agent identifier, local to an auction instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {}", self.0)
    }
}

/// A sealed bid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bid {
    pub agent: AgentId,
    pub amount: f64,
}

impl Bid {
    pub fn new(agent: AgentId, amount: f64) -> Result<Self> {
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(Error::invalid(format!("bid amount {amount} must be finite and nonnegative")));
        }
        Ok(Bid { agent, amount })
    }
}

/// Allocation and transfers of one auction run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AuctionOutcome {
    pub winner: Option<AgentId>,
    pub transfers_to_center: BTreeMap<AgentId, f64>,
    pub transfers_to_coordinator: BTreeMap<AgentId, f64>,
    pub allocation: BTreeMap<AgentId, u8>,
}

impl AuctionOutcome {
    fn with_participants(agents: impl IntoIterator<Item = AgentId>) -> Self {
        let mut out = AuctionOutcome::default();
        for a in agents {
            out.transfers_to_center.insert(a, 0.0);
            out.transfers_to_coordinator.insert(a, 0.0);
            out.allocation.insert(a, 0);
        }
        out
    }

    fn award(&mut self, winner: AgentId, payment: f64) {
        self.winner = Some(winner);
        self.allocation.insert(winner, 1);
        self.transfers_to_center.insert(winner, payment);
    }

    pub fn paid_to_center(&self, agent: AgentId) -> f64 {
        self.transfers_to_center.get(&agent).copied().unwrap_or(0.0)
    }

    pub fn paid_to_coordinator(&self, agent: AgentId) -> f64 {
        self.transfers_to_coordinator.get(&agent).copied().unwrap_or(0.0)
    }

    /// Payment collected by the center, i.e. seller revenue.
    pub fn seller_revenue(&self) -> f64 {
        self.winner.map(|w| self.paid_to_center(w)).unwrap_or(0.0)
    }
}

/// Exact allocation lottery for the highest-declaration rule: the top
/// declarations share probability one equally.
pub fn allocation_probabilities(amounts: &[f64]) -> Vec<f64> {
    let Some(top) = amounts.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let ties = amounts.iter().filter(|a| **a == top).count() as f64;
    amounts.iter().map(|a| if *a == top { 1.0 / ties } else { 0.0 }).collect()
}

/// Index of the highest amount, ties broken uniformly at random.
pub fn select_winner<R: Rng + ?Sized>(amounts: &[f64], rng: &mut R) -> Option<usize> {
    let top = amounts.iter().copied().reduce(f64::max)?;
    let tied: Vec<usize> = (0..amounts.len()).filter(|&i| amounts[i] == top).collect();
    Some(if tied.len() == 1 { tied[0] } else { tied[rng.gen_range(0..tied.len())] })
}

/// Classical first-price sealed-bid auction.
pub fn run_first_price<R: Rng + ?Sized>(bids: &[Bid], rng: &mut R) -> Result<AuctionOutcome> {
    if bids.is_empty() {
        return Err(Error::NoParticipants);
    }
    let amounts: Vec<f64> = bids.iter().map(|b| b.amount).collect();
    let mut out = AuctionOutcome::with_participants(bids.iter().map(|b| b.agent));
    if let Some(i) = select_winner(&amounts, rng) {
        out.award(bids[i].agent, bids[i].amount);
    }
    Ok(out)
}

/// Result of a participation-revelation auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevelationRun {
    pub announced: usize,
    pub outcome: AuctionOutcome,
    /// Bids from unregistered agents or repeated bids, discarded.
    pub rejected: Vec<Bid>,
}

/// First price with participation revelation: the registrant count is
/// announced before bidding and only registered agents may bid, once each.
pub fn run_participation_revelation<R, F>(registrants: &[AgentId], bid_phase: F, rng: &mut R) -> Result<RevelationRun>
where
    R: Rng + ?Sized,
    F: FnOnce(usize) -> Vec<Bid>,
{
    if registrants.is_empty() {
        return Err(Error::NoParticipants);
    }
    let registered: BTreeSet<AgentId> = registrants.iter().copied().collect();
    let announced = registered.len();
    let mut seen = BTreeSet::new();
    let (mut accepted, mut rejected) = (Vec::new(), Vec::new());
    for bid in bid_phase(announced) {
        if registered.contains(&bid.agent) && seen.insert(bid.agent) {
            accepted.push(bid);
        } else {
            rejected.push(bid);
        }
    }
    let outcome = if accepted.is_empty() {
        AuctionOutcome::with_participants(registered.iter().copied())
    } else {
        run_first_price(&accepted, rng)?
    };
    Ok(RevelationRun { announced, outcome, rejected })
}

/// Payment owed by the winner as a function of its own declaration, the
/// announced registrant count and its private signal.
pub trait PaymentRule: Send + Sync + fmt::Debug {
    fn payment(&self, declaration: f64, announced: usize, signal: Option<usize>) -> Result<f64>;
}

/// Pay the declaration itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeclaredAmount;

impl PaymentRule for DeclaredAmount {
    fn payment(&self, declaration: f64, _: usize, _: Option<usize>) -> Result<f64> {
        Ok(declaration)
    }
}

/// `b(d, n)` for a fixed `n`.
#[derive(Debug, Clone)]
pub struct FixedCountBid {
    pub engine: BidEngine,
    pub count: usize,
}

impl PaymentRule for FixedCountBid {
    fn payment(&self, declaration: f64, _: usize, _: Option<usize>) -> Result<f64> {
        self.engine.equilibrium_bid_fixed(declaration, self.count)
    }
}

/// `b(d, n)` with `n` the announced count.
#[derive(Debug, Clone)]
pub struct AnnouncedCountBid {
    pub engine: BidEngine,
}

impl PaymentRule for AnnouncedCountBid {
    fn payment(&self, declaration: f64, announced: usize, _: Option<usize>) -> Result<f64> {
        self.engine.equilibrium_bid_fixed(declaration, announced)
    }
}

/// `b(d, P)` for a fixed count distribution.
#[derive(Debug, Clone)]
pub struct StochasticCountBid {
    pub engine: BidEngine,
    pub counts: CountDistribution,
}

impl PaymentRule for StochasticCountBid {
    fn payment(&self, declaration: f64, _: usize, _: Option<usize>) -> Result<f64> {
        self.engine.bid(declaration, &self.counts)
    }
}

/// `b(d, P^{n,s})`: the bid under the club posterior for announced `n` and
/// own club size `s` (a missing signal counts as a singleton).
#[derive(Debug, Clone)]
pub struct ClubPosteriorBid {
    pub engine: BidEngine,
    pub club_sizes: ClubSizeDistribution,
}

impl PaymentRule for ClubPosteriorBid {
    fn payment(&self, declaration: f64, announced: usize, signal: Option<usize>) -> Result<f64> {
        let counts = self.club_sizes.compose(announced, signal.unwrap_or(1))?;
        self.engine.bid(declaration, &counts)
    }
}

/// Truthful first-price payment on a finite type grid.
///
/// Opponents' values are uniform on the grid and ties are split evenly. With
/// `Q_j` the win probability of declaring grid point `j` against `opponents`
/// truthful opponents, the expected payment is built from the discrete
/// envelope
///
/// `T_0 = x_0 Q_0`, `T_j = T_{j-1} + ((1 - λ) x_{j-1} + λ x_j)(Q_j - Q_{j-1})`
///
/// and the winner pays `T_j / Q_j`. Any `λ ∈ [0, 1]` makes truth-telling an
/// equilibrium; `λ = 1/2` is the trapezoid version of `v - ∫F^{n-1} / F^{n-1}`
/// and `λ = 0, 1` are its left and right Riemann versions.
#[derive(Debug, Clone)]
pub struct GridEquilibriumRule {
    grid: Vec<f64>,
    win_probability: Vec<f64>,
    expected_payment: Vec<f64>,
}

impl GridEquilibriumRule {
    pub fn new(grid: Vec<f64>, opponents: usize, lambda: f64) -> Result<Self> {
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("type grid must be nonempty and strictly increasing"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("envelope weight {lambda} outside [0, 1]")));
        }
        let g = grid.len() as f64;
        let q: Vec<f64> = (0..grid.len())
            .map(|j| {
                let (below, tie) = (j as f64 / g, 1.0 / g);
                (0..=opponents)
                    .map(|t| {
                        binomial(opponents, t)
                            * tie.powi(t as i32)
                            * below.powi((opponents - t) as i32)
                            / (t as f64 + 1.0)
                    })
                    .sum()
            })
            .collect();
        let mut t = vec![grid[0] * q[0]];
        for j in 1..grid.len() {
            let step = ((1.0 - lambda) * grid[j - 1] + lambda * grid[j]) * (q[j] - q[j - 1]);
            t.push(t[j - 1] + step);
        }
        Ok(GridEquilibriumRule { grid, win_probability: q, expected_payment: t })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn win_probability(&self, index: usize) -> f64 {
        self.win_probability[index]
    }

    pub fn payment_on_win(&self, index: usize) -> f64 {
        self.expected_payment[index] / self.win_probability[index]
    }

    fn index_of(&self, declaration: f64) -> Option<usize> {
        self.grid.iter().position(|x| *x == declaration)
    }
}

impl PaymentRule for GridEquilibriumRule {
    fn payment(&self, declaration: f64, _: usize, _: Option<usize>) -> Result<f64> {
        let j = self
            .index_of(declaration)
            .ok_or_else(|| Error::invalid(format!("declaration {declaration} is not a grid point")))?;
        Ok(self.payment_on_win(j))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One agent's message to the composed mechanism.
#[derive(Debug, Clone)]
pub struct Declaration {
    pub agent: AgentId,
    pub value: f64,
    pub signal: Option<usize>,
    pub rule: Arc<dyn PaymentRule>,
}

/// Highest declaration wins (ties uniformly at random); the winner pays its
/// own rule evaluated at its declaration, the announced count and its signal.
pub fn run_composed_mechanism<R: Rng + ?Sized>(
    declarations: &[Declaration],
    announced: usize,
    rng: &mut R,
) -> Result<AuctionOutcome> {
    if declarations.is_empty() {
        return Err(Error::NoParticipants);
    }
    let amounts: Vec<f64> = declarations.iter().map(|d| d.value).collect();
    let mut out = AuctionOutcome::with_participants(declarations.iter().map(|d| d.agent));
    if let Some(i) = select_winner(&amounts, rng) {
        let d = &declarations[i];
        out.award(d.agent, d.rule.payment(d.value, announced, d.signal)?);
    }
    Ok(out)
}

/// Monte Carlo estimate for one action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Mean utility difference against the baseline action.
    pub gain: f64,
    pub gain_stderr: f64,
}

/// Accumulates per-trial utilities of many actions evaluated on the same
/// draws, tracking differences against one baseline action.
#[derive(Debug, Clone)]
pub struct CrnEstimator {
    baseline: usize,
    trials: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    diff_sum: Vec<f64>,
    diff_sum_sq: Vec<f64>,
}

impl CrnEstimator {
    pub fn new(actions: usize, baseline: usize) -> Self {
        assert!(baseline < actions, "baseline action out of range");
        CrnEstimator {
            baseline,
            trials: 0,
            sum: vec![0.0; actions],
            sum_sq: vec![0.0; actions],
            diff_sum: vec![0.0; actions],
            diff_sum_sq: vec![0.0; actions],
        }
    }

    pub fn record(&mut self, utilities: &[f64]) {
        let base = utilities[self.baseline];
        for (i, &u) in utilities.iter().enumerate() {
            let d = u - base;
            self.sum[i] += u;
            self.sum_sq[i] += u * u;
            self.diff_sum[i] += d;
            self.diff_sum_sq[i] += d * d;
        }
        self.trials += 1;
    }

    /// Combines statistics from disjoint trial sets.
    pub fn merge(&mut self, other: &CrnEstimator) {
        assert_eq!(self.sum.len(), other.sum.len());
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
            self.diff_sum[i] += other.diff_sum[i];
            self.diff_sum_sq[i] += other.diff_sum_sq[i];
        }
        self.trials += other.trials;
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn estimates(&self) -> Vec<ActionEstimate> {
        (0..self.sum.len())
            .map(|i| {
                let (mean, stderr) = mean_stderr(self.sum[i], self.sum_sq[i], self.trials);
                let (gain, gain_stderr) = mean_stderr(self.diff_sum[i], self.diff_sum_sq[i], self.trials);
                ActionEstimate { mean, stderr, gain, gain_stderr }
            })
            .collect()
    }
}

/// Sample mean and standard error (sample sd over √n) from raw sums.
pub fn mean_stderr(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Outcome of a grid best-response search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    pub best_action: f64,
    pub expected_utility: f64,
    pub standard_error: f64,
    /// One estimate per grid action, gains measured against the first action.
    pub estimates: Vec<ActionEstimate>,
}

/// Grid search for the action with the highest expected utility.
///
/// Trial `t` draws one scenario from `sample` with [`trial_rng`]`(seed, t)`
/// and every action is scored on that same scenario, so utility differences
/// between actions carry no sampling noise from independent draws.
pub fn best_response_value<S, G, U>(
    action_grid: &[f64],
    trials: u64,
    seed: u64,
    mut sample: G,
    utility: U,
) -> Result<BestResponse>
where
    G: FnMut(&mut SimRng) -> S,
    U: Fn(&S, f64) -> f64,
{
    if action_grid.is_empty() {
        return Err(Error::invalid("action grid is empty"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let mut est = CrnEstimator::new(action_grid.len(), 0);
    let mut utilities = vec![0.0; action_grid.len()];
    for t in 0..trials {
        let scenario = sample(&mut trial_rng(seed, t));
        for (u, &a) in utilities.iter_mut().zip(action_grid) {
            *u = utility(&scenario, a);
        }
        est.record(&utilities);
    }
    let estimates = est.estimates();
    let best = (0..estimates.len())
        .reduce(|b, i| if estimates[i].mean > estimates[b].mean { i } else { b })
        .unwrap_or(0);
    Ok(BestResponse {
        best_action: action_grid[best],
        expected_utility: estimates[best].mean,
        standard_error: estimates[best].stderr,
        estimates,
    })
}

/// `points` evenly spaced actions on `[0, hi]`.
pub fn action_grid(hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| hi * i as f64 / (points - 1) as f64).collect(),
    }
}

/// First-price utility of bidding `amount` against a highest competing bid;
/// exact ties split the good evenly with one rival.
pub fn first_price_utility(value: f64, amount: f64, highest_competing: f64) -> f64 {
    if amount > highest_competing {
        value - amount
    } else if amount == highest_competing {
        0.5 * (value - amount)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bid_engine::MixtureRule;
    use crate::distributions::uniform_valuations;
    use crate::rng::seeded;

    fn bid(id: usize, amount: f64) -> Bid {
        Bid::new(AgentId(id), amount).unwrap()
    }

    #[test]
    fn highest_bid_wins_and_pays_own_bid() {
        let out = run_first_price(&[bid(1, 0.3), bid(2, 0.5)], &mut seeded(1)).unwrap();
        assert_eq!(out.winner, Some(AgentId(2)));
        assert_eq!(out.paid_to_center(AgentId(2)), 0.5);
        assert_eq!(out.paid_to_center(AgentId(1)), 0.0);
        assert_eq!(out.allocation[&AgentId(2)], 1);
        assert_eq!(out.allocation[&AgentId(1)], 0);
        assert_eq!(out.seller_revenue(), 0.5);
    }

    #[test]
    fn single_zero_bid() {
        let out = run_first_price(&[bid(1, 0.0)], &mut seeded(1)).unwrap();
        assert_eq!(out.winner, Some(AgentId(1)));
        assert_eq!(out.paid_to_center(AgentId(1)), 0.0);
    }

    #[test]
    fn empty_auction_is_an_error() {
        assert_eq!(run_first_price(&[], &mut seeded(1)), Err(Error::NoParticipants));
    }

    #[test]
    fn invalid_bids_rejected() {
        assert!(Bid::new(AgentId(0), -0.1).is_err());
        assert!(Bid::new(AgentId(0), f64::INFINITY).is_err());
    }

    #[test]
    fn symmetric_ties_split_evenly() {
        let bids = [bid(1, 0.4), bid(2, 0.4)];
        let trials = 1_000_000u64;
        let mut rng = seeded(99);
        let wins = (0..trials)
            .filter(|_| run_first_price(&bids, &mut rng).unwrap().winner == Some(AgentId(1)))
            .count();
        let share = wins as f64 / trials as f64;
        assert!((share - 0.5).abs() < 0.002, "share {share}");
    }

    #[test]
    fn allocation_lottery() {
        assert_eq!(allocation_probabilities(&[0.1, 0.5, 0.5]), vec![0.0, 0.5, 0.5]);
        assert_eq!(allocation_probabilities(&[0.7]), vec![1.0]);
        assert!(allocation_probabilities(&[]).is_empty());
    }

    #[test]
    fn participation_revelation_filters_unregistered() {
        let registrants = [AgentId(1), AgentId(2)];
        let run = run_participation_revelation(
            &registrants,
            |n| {
                assert_eq!(n, 2);
                vec![bid(1, 0.2), bid(7, 0.9), bid(2, 0.3), bid(2, 0.8)]
            },
            &mut seeded(3),
        )
        .unwrap();
        assert_eq!(run.announced, 2);
        assert_eq!(run.outcome.winner, Some(AgentId(2)));
        assert_eq!(run.outcome.paid_to_center(AgentId(2)), 0.3);
        assert_eq!(run.rejected, vec![bid(7, 0.9), bid(2, 0.8)]);
    }

    #[test]
    fn announced_count_ignores_missing_bids() {
        let registrants = [AgentId(0), AgentId(1), AgentId(2)];
        let run = run_participation_revelation(&registrants, |_| vec![bid(0, 0.1)], &mut seeded(3)).unwrap();
        assert_eq!(run.announced, 3);
        assert_eq!(run.outcome.winner, Some(AgentId(0)));
        let run = run_participation_revelation(&registrants, |_| Vec::new(), &mut seeded(3)).unwrap();
        assert_eq!(run.outcome.winner, None);
        assert!(run_participation_revelation(&[], |_| Vec::new(), &mut seeded(3)).is_err());
    }

    #[test]
    fn truthful_revelation_bidders() {
        let engine = BidEngine::new(uniform_valuations(), MixtureRule::WinWeighted);
        let values = [0.3, 0.9, 0.6];
        let registrants: Vec<AgentId> = (0..3).map(AgentId).collect();
        let run = run_participation_revelation(
            &registrants,
            |n| {
                values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| bid(i, engine.equilibrium_bid_fixed(*v, n).unwrap()))
                    .collect()
            },
            &mut seeded(5),
        )
        .unwrap();
        assert_eq!(run.outcome.winner, Some(AgentId(1)));
        assert!((run.outcome.paid_to_center(AgentId(1)) - 0.6).abs() < 1e-12);
    }

    fn rule_b2() -> Arc<dyn PaymentRule> {
        Arc::new(FixedCountBid { engine: BidEngine::new(uniform_valuations(), MixtureRule::WinWeighted), count: 2 })
    }

    fn declare(id: usize, value: f64, rule: Arc<dyn PaymentRule>) -> Declaration {
        Declaration { agent: AgentId(id), value, signal: None, rule }
    }

    #[test]
    fn composed_mechanism_charges_winner_rule() {
        let out = run_composed_mechanism(&[declare(1, 0.9, rule_b2()), declare(2, 0.4, rule_b2())], 2, &mut seeded(1))
            .unwrap();
        assert_eq!(out.winner, Some(AgentId(1)));
        assert!((out.paid_to_center(AgentId(1)) - 0.45).abs() < 1e-12);
        assert_eq!(out.paid_to_center(AgentId(2)), 0.0);

        let mixed = run_composed_mechanism(
            &[declare(1, 0.9, Arc::new(DeclaredAmount)), declare(2, 0.4, rule_b2())],
            2,
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(mixed.winner, Some(AgentId(1)));
        assert_eq!(mixed.paid_to_center(AgentId(1)), 0.9);

        let swapped = run_composed_mechanism(
            &[declare(1, 0.4, Arc::new(DeclaredAmount)), declare(2, 0.9, rule_b2())],
            2,
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(swapped.winner, Some(AgentId(2)));
        assert!((swapped.paid_to_center(AgentId(2)) - 0.45).abs() < 1e-12);
    }

    #[test]
    fn grid_rule_is_individually_rational() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for lambda in [0.0, 0.5, 1.0] {
            let rule = GridEquilibriumRule::new(grid.clone(), 2, lambda).unwrap();
            for (j, x) in grid.iter().enumerate() {
                assert!(rule.payment_on_win(j) <= x + 1e-15);
            }
            assert!(rule.payment(0.33, 3, None).is_err());
        }
        assert!(GridEquilibriumRule::new(vec![0.0, 0.0], 2, 0.5).is_err());
        assert!(GridEquilibriumRule::new(vec![0.0, 1.0], 2, 1.5).is_err());
    }

    #[test]
    fn best_response_to_half_value_bidder() {
        // Opponent bids v/2 with v ~ U[0,1]; the analytic best response of a
        // bidder with value 0.8 maximises (0.8 - b) * 2b, i.e. b = 0.4.
        let grid = action_grid(1.0, 256);
        let br = best_response_value(
            &grid,
            200_000,
            11,
            |rng| 0.5 * rng.gen::<f64>(),
            |hcb, a| first_price_utility(0.8, a, *hcb),
        )
        .unwrap();
        assert!((br.best_action - 0.4).abs() <= 1.0 / 255.0 + 1e-12, "{}", br.best_action);
        assert!((br.expected_utility - 0.32).abs() < 5.0 * br.standard_error.max(1e-3));
    }

    #[test]
    fn best_response_degenerate_cases() {
        let br = best_response_value(&action_grid(1.0, 64), 1000, 1, |rng| 0.5 * rng.gen::<f64>(), |h, a| {
            first_price_utility(0.0, a, *h)
        })
        .unwrap();
        assert_eq!(br.expected_utility, 0.0);

        let single = best_response_value(&[0.3], 100, 1, |rng| rng.gen::<f64>(), |h, a| first_price_utility(0.5, a, *h))
            .unwrap();
        assert_eq!(single.best_action, 0.3);
        assert!(best_response_value(&[], 10, 1, |_| 0.0, |_, _| 0.0).is_err());
    }

    #[test]
    fn crn_estimator_merges_like_a_single_pass() {
        let rows = [[1.0, 0.5, 0.0], [0.2, 0.4, 0.1], [0.0, 0.9, 0.3], [0.6, 0.6, 0.6]];
        let mut whole = CrnEstimator::new(3, 1);
        rows.iter().for_each(|r| whole.record(r));
        let mut a = CrnEstimator::new(3, 1);
        let mut b = CrnEstimator::new(3, 1);
        rows[..2].iter().for_each(|r| a.record(r));
        rows[2..].iter().for_each(|r| b.record(r));
        a.merge(&b);
        assert_eq!(a.trials(), 4);
        for (x, y) in a.estimates().iter().zip(whole.estimates()) {
            assert!((x.mean - y.mean).abs() < 1e-15);
            assert!((x.gain_stderr - y.gain_stderr).abs() < 1e-15);
        }
        assert_eq!(whole.estimates()[1].gain, 0.0);
    }
}
