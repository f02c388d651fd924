//! Full-protocol simulation of one auction instance.

use serde::Serialize;

use crate::bid_engine::BidEngine;
use crate::club_protocol::{ClubState, Coordinator, Response};
use crate::environment::{AuctionInstance, EnvironmentConfig};
use crate::error::{Error, Result};
use crate::mechanisms::{run_participation_revelation, AgentId, AuctionOutcome, Bid};
use crate::rng::SimRng;

/// What an agent did in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AgentAction {
    /// Accepted its club's invitation with a declaration.
    Accepted { club: usize, declared: f64 },
    /// Bid on its own in the main auction.
    Direct { bid: f64 },
}

/// Everything that happened in one simulated auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub instance: AuctionInstance,
    pub announced: usize,
    /// Indexed by agent id.
    pub actions: Vec<AgentAction>,
    pub outcome: AuctionOutcome,
    /// Realized utility per agent: `v - payments` for the winner, 0 otherwise.
    pub utilities: Vec<f64>,
    /// Per club index; zero for singletons.
    pub coordinator_revenue: Vec<f64>,
    pub seller_revenue: f64,
}

impl TrialRecord {
    pub fn total_coordinator_revenue(&self) -> f64 {
        self.coordinator_revenue.iter().sum()
    }

    pub fn utility(&self, agent: AgentId) -> f64 {
        self.utilities[agent.0]
    }
}

/// Runs instances through the club protocol and the participation-revelation
/// auction with every agent following the equilibrium strategy.
#[derive(Debug, Clone)]
pub struct ProtocolSimulator {
    coordinator: Coordinator,
    config: EnvironmentConfig,
}

impl ProtocolSimulator {
    pub fn new(engine: BidEngine, config: &EnvironmentConfig) -> Self {
        ProtocolSimulator { coordinator: Coordinator::new(engine, config.club_sizes.clone()), config: config.clone() }
    }

    pub fn coordinator(&self) -> &Coordinator {
        &self.coordinator
    }

    pub fn run(&self, instance: &AuctionInstance, rng: &mut SimRng) -> Result<TrialRecord> {
        let kappa = self.config.club_sizes.kappa();
        let mut actions: Vec<Option<AgentAction>> = vec![None; instance.total_agents()];
        let mut clubs = Vec::new();
        let mut singletons = Vec::new();
        let mut registrants = Vec::new();
        for (index, club) in instance.clubs.iter().enumerate() {
            if club.is_singleton() {
                singletons.push(club.members[0]);
                registrants.push(club.members[0]);
                continue;
            }
            let mut state = ClubState::new(club.id, club.members.clone(), kappa)?;
            for m in &club.members {
                let declared = instance.agent(*m).value;
                state.respond(*m, Response::Accept { declared_value: declared }, &self.config.valuations)?;
                actions[m.0] = Some(AgentAction::Accepted { club: club.id, declared });
            }
            registrants.extend(state.register(rng)?.registrants());
            clubs.push((index, state));
        }

        let mut failure: Option<Error> = None;
        let run = run_participation_revelation(
            &registrants,
            |announced| {
                let mut bids = Vec::with_capacity(announced);
                let mut place = || -> Result<()> {
                    for (_, state) in clubs.iter_mut() {
                        bids.extend(state.main_auction_bids(announced, &self.coordinator)?);
                    }
                    for s in &singletons {
                        let bid = self.coordinator.posterior_bid(instance.agent(*s).value, announced, 1)?;
                        actions[s.0] = Some(AgentAction::Direct { bid });
                        bids.push(Bid::new(*s, bid)?);
                    }
                    Ok(())
                };
                if let Err(e) = place() {
                    failure = Some(e);
                }
                bids
            },
            rng,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }

        let mut outcome = run.outcome;
        let mut coordinator_revenue = vec![0.0; instance.clubs.len()];
        for (index, state) in clubs.iter_mut() {
            let settlement = state.settle(&outcome, run.announced, &self.coordinator)?;
            settlement.apply(&mut outcome);
            coordinator_revenue[*index] = settlement.coordinator_payment;
        }
        let mut utilities = vec![0.0; instance.total_agents()];
        if let Some(w) = outcome.winner {
            utilities[w.0] = instance.agent(w).value - outcome.paid_to_center(w) - outcome.paid_to_coordinator(w);
        }
        let seller_revenue = outcome.seller_revenue();
        Ok(TrialRecord {
            instance: instance.clone(),
            announced: run.announced,
            actions: actions.into_iter().map(|a| a.expect("every agent acts")).collect(),
            outcome,
            utilities,
            coordinator_revenue,
            seller_revenue,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bid_engine::MixtureRule;
    use crate::rng::seeded;

    fn simulator() -> ProtocolSimulator {
        let config = EnvironmentConfig::reference();
        ProtocolSimulator::new(BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted), &config)
    }

    #[test]
    fn club_member_wins_and_pays_the_club_price() {
        let sim = simulator();
        let inst = AuctionInstance::from_club_sizes(&[2, 1], vec![0.9, 0.3, 0.6]).unwrap();
        let rec = sim.run(&inst, &mut seeded(0)).unwrap();
        assert_eq!(rec.announced, 2);
        assert_eq!(rec.outcome.winner, Some(AgentId(0)));
        let club_price = sim.coordinator().posterior_bid(0.9, 2, 2).unwrap();
        let forwarded = sim.coordinator().posterior_bid(0.9, 2, 1).unwrap();
        assert!((rec.utilities[0] - (0.9 - club_price)).abs() < 1e-12);
        assert_eq!(rec.seller_revenue, forwarded);
        assert!((rec.coordinator_revenue[0] - (club_price - forwarded)).abs() < 1e-15);
        assert_eq!(rec.coordinator_revenue[1], 0.0);
        assert_eq!(rec.utilities[1], 0.0);
        assert_eq!(rec.utilities[2], 0.0);
    }

    #[test]
    fn singleton_winner_pays_its_bid() {
        let sim = simulator();
        let inst = AuctionInstance::from_club_sizes(&[2, 1], vec![0.2, 0.3, 0.6]).unwrap();
        let rec = sim.run(&inst, &mut seeded(0)).unwrap();
        assert_eq!(rec.outcome.winner, Some(AgentId(2)));
        let bid = sim.coordinator().posterior_bid(0.6, 2, 1).unwrap();
        assert_eq!(rec.seller_revenue, bid);
        assert_eq!(rec.total_coordinator_revenue(), 0.0);
        assert!((rec.utilities[2] - (0.6 - bid)).abs() < 1e-15);
        assert_eq!(rec.actions[2], AgentAction::Direct { bid });
    }

    #[test]
    fn all_singletons_means_no_coordinator_revenue() {
        let sim = simulator();
        let inst = AuctionInstance::from_club_sizes(&[1, 1, 1], vec![0.2, 0.5, 0.4]).unwrap();
        let rec = sim.run(&inst, &mut seeded(3)).unwrap();
        assert_eq!(rec.total_coordinator_revenue(), 0.0);
        assert_eq!(rec.announced, 3);
    }
}
