//! One club of two moving through the coordinator protocol.

use bidding_clubs::mechanisms::run_participation_revelation;
use bidding_clubs::rng::seeded;
use bidding_clubs::{AgentId, BidEngine, ClubState, Coordinator, EnvironmentConfig, MixtureRule, Response};

fn main() -> bidding_clubs::Result<()> {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    let coordinator = Coordinator::new(engine.clone(), config.club_sizes.clone());
    let mut rng = seeded(5);

    let mut club = ClubState::new(0, vec![AgentId(0), AgentId(1)], config.club_sizes.kappa())?;
    club.respond(AgentId(0), Response::Accept { declared_value: 0.8 }, &config.valuations)?;
    club.respond(AgentId(1), Response::Accept { declared_value: 0.5 }, &config.valuations)?;
    let mut registrants = club.register(&mut rng)?.registrants();
    // One outside singleton with value 0.55.
    registrants.push(AgentId(2));

    let run = run_participation_revelation(
        &registrants,
        |announced| {
            let mut bids = club.main_auction_bids(announced, &coordinator).expect("registered");
            let outside = coordinator.posterior_bid(0.55, announced, 1).expect("valid value");
            bids.push(bidding_clubs::Bid::new(AgentId(2), outside).expect("finite bid"));
            bids
        },
        &mut rng,
    )?;
    let settlement = club.settle(&run.outcome, run.announced, &coordinator)?;
    println!("announced {} registrants, winner {:?}", run.announced, run.outcome.winner);
    println!(
        "to center {:.6}, to coordinator {:.6}",
        settlement.main_auction_payment, settlement.coordinator_payment
    );
    println!("{}", serde_json::to_string_pretty(&club.trace()).expect("trace serializes"));
    Ok(())
}
