//! The bidding-club coordinator.
//!
//! Protocol for a club of `k` invited agents, with `n` the registrant count
//! announced by the main auction:
//!
//! 1. every invited agent accepts (with a declared value) or declines;
//! 2. if anyone declines, the coordinator registers every acceptor and bids
//!    `b(μ_i, P^{n,k})` for each of them, decliners bid on their own;
//! 3. if all accept, only the highest declaration `h` is registered and the
//!    coordinator bids `b(μ_h, P^{n,1})`, the same bid a singleton would place;
//! 4. if `h` wins, it pays that bid to the center and
//!    `b(μ_h, P^{n,k}) - b(μ_h, P^{n,1})` to the coordinator.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bid_engine::BidEngine;
use crate::distributions::{ClubSizeDistribution, CountDistribution, ValuationDistribution};
use crate::environment::{EnvironmentConfig, EnvironmentSampler};
use crate::error::{Error, Result};
use crate::mechanisms::{self, first_price_utility, AgentId, AuctionOutcome, Bid, CrnEstimator};
use crate::rng::{trial_rng, SimRng};

/// An invited agent's answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Response {
    Accept { declared_value: f64 },
    Decline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Collecting,
    Registered,
    Settled,
}

/// What the coordinator registers in the main auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RegistrationPlan {
    /// Everyone accepted; only the highest declaration goes forward.
    Forward { representative: AgentId, declared_value: f64 },
    /// Someone declined; every acceptor is registered individually.
    Disbanded { acceptors: Vec<(AgentId, f64)>, decliners: Vec<AgentId> },
}

impl RegistrationPlan {
    /// Agents registered by the coordinator (decliners register themselves).
    pub fn registrants(&self) -> Vec<AgentId> {
        match self {
            RegistrationPlan::Forward { representative, .. } => vec![*representative],
            RegistrationPlan::Disbanded { acceptors, .. } => acceptors.iter().map(|(a, _)| *a).collect(),
        }
    }
}

/// Transfers owed by a club member after the main auction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settlement {
    pub main_auction_payment: f64,
    pub coordinator_payment: f64,
    pub paying_agent: Option<AgentId>,
}

impl Settlement {
    pub const NONE: Settlement = Settlement { main_auction_payment: 0.0, coordinator_payment: 0.0, paying_agent: None };

    pub fn total(&self) -> f64 {
        self.main_auction_payment + self.coordinator_payment
    }

    /// Records the coordinator payment in `outcome`.
    pub fn apply(&self, outcome: &mut AuctionOutcome) {
        if let Some(a) = self.paying_agent {
            outcome.transfers_to_coordinator.insert(a, self.coordinator_payment);
        }
    }
}

/// Bid computations shared by all clubs of one environment.
#[derive(Debug, Clone)]
pub struct Coordinator {
    engine: BidEngine,
    club_sizes: ClubSizeDistribution,
}

impl Coordinator {
    pub fn new(engine: BidEngine, club_sizes: ClubSizeDistribution) -> Self {
        Coordinator { engine, club_sizes }
    }

    pub fn engine(&self) -> &BidEngine {
        &self.engine
    }

    pub fn club_sizes(&self) -> &ClubSizeDistribution {
        &self.club_sizes
    }

    pub fn belief(&self, announced: usize, own_size: usize) -> Result<CountDistribution> {
        self.club_sizes.compose(announced, own_size)
    }

    /// `b(v, P^{n,k})`.
    pub fn posterior_bid(&self, value: f64, announced: usize, own_size: usize) -> Result<f64> {
        self.engine.bid(value, &self.belief(announced, own_size)?)
    }
}

/// Serializable audit record of one club.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClubTrace {
    pub club_id: usize,
    pub invited: Vec<AgentId>,
    pub responses: BTreeMap<AgentId, Response>,
    pub plan: Option<RegistrationPlan>,
    pub bids: Vec<Bid>,
    pub settlement: Option<Settlement>,
    pub warnings: Vec<String>,
}

/// One club moving through collecting → registered → settled.
#[derive(Debug, Clone)]
pub struct ClubState {
    club_id: usize,
    invited: Vec<AgentId>,
    responses: BTreeMap<AgentId, Response>,
    phase: Phase,
    plan: Option<RegistrationPlan>,
    bids: Vec<Bid>,
    settlement: Option<Settlement>,
    warnings: Vec<String>,
}

impl ClubState {
    pub fn new(club_id: usize, invited: Vec<AgentId>, kappa: usize) -> Result<Self> {
        if invited.len() < 2 || invited.len() > kappa {
            return Err(Error::invalid(format!(
                "club {club_id} invites {} agents, expected 2..={kappa}",
                invited.len()
            )));
        }
        Ok(ClubState {
            club_id,
            invited,
            responses: BTreeMap::new(),
            phase: Phase::Collecting,
            plan: None,
            bids: Vec::new(),
            settlement: None,
            warnings: Vec::new(),
        })
    }

    pub fn club_id(&self) -> usize {
        self.club_id
    }

    pub fn size(&self) -> usize {
        self.invited.len()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn plan(&self) -> Option<&RegistrationPlan> {
        self.plan.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Records a response. Declarations outside the valuation support are
    /// clamped into it and a warning is kept.
    pub fn respond(&mut self, agent: AgentId, response: Response, valuations: &ValuationDistribution) -> Result<()> {
        if self.phase != Phase::Collecting {
            return Err(Error::ProtocolOrder(format!("club {} no longer collects responses", self.club_id)));
        }
        if !self.invited.contains(&agent) {
            return Err(Error::invalid(format!("{agent} was not invited to club {}", self.club_id)));
        }
        let response = match response {
            Response::Accept { declared_value } if !valuations.contains(declared_value) => {
                let clamped = valuations.clamp(declared_value);
                self.warnings
                    .push(format!("{agent} declared {declared_value} outside the support, clamped to {clamped}"));
                Response::Accept { declared_value: clamped }
            }
            r => r,
        };
        self.responses.insert(agent, response);
        Ok(())
    }

    /// Decides whom to register. Exact ties for the highest declaration are
    /// broken uniformly at random.
    pub fn register(&mut self, rng: &mut SimRng) -> Result<&RegistrationPlan> {
        if self.phase != Phase::Collecting {
            return Err(Error::ProtocolOrder(format!("club {} already registered", self.club_id)));
        }
        if let Some(missing) = self.invited.iter().find(|a| !self.responses.contains_key(a)) {
            return Err(Error::ProtocolOrder(format!("{missing} has not answered club {}", self.club_id)));
        }
        let mut acceptors = Vec::new();
        let mut decliners = Vec::new();
        for a in &self.invited {
            match self.responses[a] {
                Response::Accept { declared_value } => acceptors.push((*a, declared_value)),
                Response::Decline => decliners.push(*a),
            }
        }
        let plan = if decliners.is_empty() {
            let values: Vec<f64> = acceptors.iter().map(|(_, v)| *v).collect();
            let h = mechanisms::select_winner(&values, rng).expect("club has members");
            RegistrationPlan::Forward { representative: acceptors[h].0, declared_value: acceptors[h].1 }
        } else {
            RegistrationPlan::Disbanded { acceptors, decliners }
        };
        self.phase = Phase::Registered;
        Ok(self.plan.insert(plan))
    }

    /// Bids the coordinator places once `announced` is known.
    pub fn main_auction_bids(&mut self, announced: usize, coordinator: &Coordinator) -> Result<Vec<Bid>> {
        let plan = self.registered_plan()?;
        let bids = match plan {
            RegistrationPlan::Forward { representative, declared_value } => {
                vec![Bid::new(*representative, coordinator.posterior_bid(*declared_value, announced, 1)?)?]
            }
            RegistrationPlan::Disbanded { acceptors, .. } => acceptors
                .iter()
                .map(|(a, v)| Bid::new(*a, coordinator.posterior_bid(*v, announced, self.invited.len())?))
                .collect::<Result<_>>()?,
        };
        self.bids = bids.clone();
        Ok(bids)
    }

    /// Registration followed by bidding for a known announcement.
    pub fn collect_and_register(
        &mut self,
        announced: usize,
        coordinator: &Coordinator,
        rng: &mut SimRng,
    ) -> Result<Vec<Bid>> {
        self.register(rng)?;
        self.main_auction_bids(announced, coordinator)
    }

    /// Settles the club's transfers for a resolved main auction.
    pub fn settle(&mut self, outcome: &AuctionOutcome, announced: usize, coordinator: &Coordinator) -> Result<Settlement> {
        if self.phase == Phase::Settled {
            return Err(Error::ProtocolOrder(format!("club {} already settled", self.club_id)));
        }
        let plan = self.registered_plan()?;
        let settlement = match (plan, outcome.winner) {
            (RegistrationPlan::Forward { representative, declared_value }, Some(w)) if w == *representative => {
                let forwarded = coordinator.posterior_bid(*declared_value, announced, 1)?;
                let full = coordinator.posterior_bid(*declared_value, announced, self.invited.len())?;
                Settlement { main_auction_payment: forwarded, coordinator_payment: full - forwarded, paying_agent: Some(w) }
            }
            (RegistrationPlan::Disbanded { acceptors, .. }, Some(w)) if acceptors.iter().any(|(a, _)| *a == w) => {
                Settlement { main_auction_payment: outcome.paid_to_center(w), coordinator_payment: 0.0, paying_agent: Some(w) }
            }
            _ => Settlement::NONE,
        };
        self.settlement = Some(settlement);
        self.phase = Phase::Settled;
        Ok(settlement)
    }

    pub fn trace(&self) -> ClubTrace {
        ClubTrace {
            club_id: self.club_id,
            invited: self.invited.clone(),
            responses: self.responses.clone(),
            plan: self.plan.clone(),
            bids: self.bids.clone(),
            settlement: self.settlement,
            warnings: self.warnings.clone(),
        }
    }

    fn registered_plan(&self) -> Result<&RegistrationPlan> {
        match (&self.plan, self.phase) {
            (Some(plan), Phase::Registered) => Ok(plan),
            (_, Phase::Settled) => Err(Error::ProtocolOrder(format!("club {} already settled", self.club_id))),
            _ => Err(Error::ProtocolOrder(format!("club {} has not registered yet", self.club_id))),
        }
    }
}

/// Monte Carlo comparison of the false-name deviation with equilibrium play.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalseNameEstimate {
    pub value: f64,
    pub club_size: usize,
    pub trials: u64,
    pub equilibrium_utility: f64,
    pub equilibrium_stderr: f64,
    pub deviation_utility: f64,
    pub deviation_stderr: f64,
    pub gain: f64,
    pub gain_stderr: f64,
    /// Direct bid used for each announced count, chosen on a pilot sample.
    pub direct_bids: BTreeMap<usize, f64>,
}

/// One draw of everything the deviating club member competes against.
struct FalseNameDraw {
    coordinators: usize,
    best_other: f64,
    best_mate: f64,
}

/// False-name deviation of a club member when bids cannot be tied to
/// identities: accept the invitation, declare the bottom of the support to the
/// coordinator (so a club-mate is forwarded) and bid directly in the main
/// auction under a second identity, which also raises the announced count by
/// one.
///
/// The direct bid is chosen per announced count from `bid_grid`, on a pilot
/// sample independent of the evaluation trials. Equilibrium utility is the
/// truthful all-accept outcome on the same evaluation draws.
pub fn false_name_deviation_scenario(
    value: f64,
    club_size: usize,
    config: &EnvironmentConfig,
    engine: &BidEngine,
    bid_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<FalseNameEstimate> {
    if config.identity_enforcement {
        return Err(Error::ScenarioUnavailable(
            "false-name bidding needs identity enforcement to be disabled".into(),
        ));
    }
    if club_size < 2 || club_size > config.club_sizes.kappa() {
        return Err(Error::invalid(format!("club size {club_size} outside 2..={}", config.club_sizes.kappa())));
    }
    if !config.valuations.contains(value) {
        return Err(Error::invalid(format!("value {value} outside the valuation support")));
    }
    if bid_grid.is_empty() || trials == 0 {
        return Err(Error::invalid("need a nonempty bid grid and at least one trial"));
    }
    let coordinator = Coordinator::new(engine.clone(), config.club_sizes.clone());
    let sampler = EnvironmentSampler::new(config);
    let draw = |rng: &mut SimRng| {
        let inst = sampler.sample_with_leading(&[club_size], rng);
        let mates = &inst.clubs[0].members[1..];
        let best_mate = mates.iter().map(|m| inst.agent(*m).value).fold(f64::NEG_INFINITY, f64::max);
        let best_other = inst.clubs[1..]
            .iter()
            .flat_map(|c| c.members.iter())
            .map(|m| inst.agent(*m).value)
            .fold(f64::NEG_INFINITY, f64::max);
        FalseNameDraw { coordinators: inst.n_potential_coordinators(), best_other, best_mate }
    };
    // Highest competing main-auction bid once the deviator's second identity
    // raises the announcement to n_c + 1.
    let competing = |d: &FalseNameDraw| -> Result<f64> {
        let n = d.coordinators + 1;
        let others = coordinator.posterior_bid(d.best_other, n, 1)?;
        let mate = coordinator.posterior_bid(d.best_mate, n, 1)?;
        Ok(others.max(mate))
    };

    // Pilot: pick the direct bid per announced count.
    let counts: Vec<usize> = config.coordinator_counts.iter().map(|(c, _)| c + 1).collect();
    let mut pilot: BTreeMap<usize, CrnEstimator> =
        counts.iter().map(|&n| (n, CrnEstimator::new(bid_grid.len(), 0))).collect();
    let mut utilities = vec![0.0; bid_grid.len()];
    let pilot_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    for t in 0..trials.div_ceil(4) {
        let d = draw(&mut trial_rng(pilot_seed, t));
        let hcb = competing(&d)?;
        for (u, b) in utilities.iter_mut().zip(bid_grid) {
            *u = first_price_utility(value, *b, hcb);
        }
        pilot.get_mut(&(d.coordinators + 1)).expect("count in support").record(&utilities);
    }
    let direct_bids: BTreeMap<usize, f64> = pilot
        .iter()
        .map(|(n, est)| {
            let e = est.estimates();
            let best = (0..e.len()).reduce(|b, i| if e[i].mean > e[b].mean { i } else { b }).unwrap_or(0);
            (*n, bid_grid[best])
        })
        .collect();

    // Evaluation: [equilibrium, deviation] on common draws.
    let mut est = CrnEstimator::new(2, 0);
    for t in 0..trials {
        let d = draw(&mut trial_rng(seed, t));
        let n = d.coordinators;
        let truthful_wins = value > d.best_mate
            && coordinator.posterior_bid(value, n, 1)? > coordinator.posterior_bid(d.best_other, n, 1)?;
        let equilibrium = if truthful_wins { value - coordinator.posterior_bid(value, n, club_size)? } else { 0.0 };
        let deviation = first_price_utility(value, direct_bids[&(n + 1)], competing(&d)?);
        est.record(&[equilibrium, deviation]);
    }
    let e = est.estimates();
    Ok(FalseNameEstimate {
        value,
        club_size,
        trials,
        equilibrium_utility: e[0].mean,
        equilibrium_stderr: e[0].stderr,
        deviation_utility: e[1].mean,
        deviation_stderr: e[1].stderr,
        gain: e[1].gain,
        gain_stderr: e[1].gain_stderr,
        direct_bids,
    })
}
