//! First price with participation revelation and the composed mechanism.

use std::sync::Arc;

use bidding_clubs::distributions::uniform_valuations;
use bidding_clubs::mechanisms::{
    run_composed_mechanism, run_participation_revelation, AnnouncedCountBid, Declaration, DeclaredAmount, FixedCountBid,
};
use bidding_clubs::rng::seeded;
use bidding_clubs::{AgentId, Bid, BidEngine, MixtureRule};

fn main() -> bidding_clubs::Result<()> {
    let engine = BidEngine::new(uniform_valuations(), MixtureRule::WinWeighted);
    let values = [0.3, 0.9, 0.7];
    let registrants: Vec<AgentId> = (0..values.len()).map(AgentId).collect();
    let mut rng = seeded(1);

    let run = run_participation_revelation(
        &registrants,
        |n| {
            let mut bids: Vec<Bid> = values
                .iter()
                .enumerate()
                .map(|(i, v)| Bid::new(AgentId(i), engine.equilibrium_bid_fixed(*v, n).unwrap()).unwrap())
                .collect();
            // An unregistered bidder is turned away.
            bids.push(Bid::new(AgentId(9), 0.95).unwrap());
            bids
        },
        &mut rng,
    )?;
    println!(
        "announced {}, winner {:?} pays {:.4}, rejected {} bid(s)",
        run.announced,
        run.outcome.winner,
        run.outcome.seller_revenue(),
        run.rejected.len()
    );

    // Each agent brings its own payment rule; the winner pays its own.
    let declarations = vec![
        Declaration { agent: AgentId(0), value: 0.3, signal: None, rule: Arc::new(DeclaredAmount) },
        Declaration { agent: AgentId(1), value: 0.9, signal: None, rule: Arc::new(FixedCountBid { engine: engine.clone(), count: 3 }) },
        Declaration { agent: AgentId(2), value: 0.7, signal: None, rule: Arc::new(AnnouncedCountBid { engine }) },
    ];
    let out = run_composed_mechanism(&declarations, 3, &mut rng)?;
    println!("composed: winner {:?} pays {:.4}", out.winner, out.seller_revenue());
    Ok(())
}
