//! Equilibrium bids for a known and for an uncertain number of bidders.

use bidding_clubs::distributions::{power_valuations, uniform_valuations};
use bidding_clubs::{BidEngine, CountDistribution, MixtureRule};

fn main() -> bidding_clubs::Result<()> {
    let uniform = BidEngine::new(uniform_valuations(), MixtureRule::WinWeighted);
    println!("uniform values, known count");
    for n in 2..=5 {
        let b = uniform.equilibrium_bid_fixed(0.6, n)?;
        println!("  n={n}  b(0.6) = {b:.6}  closed form {:.6}", 0.6 * (n - 1) as f64 / n as f64);
    }

    let power = BidEngine::new(power_valuations(2.0)?, MixtureRule::WinWeighted);
    println!("F(v) = v^2, n=3: b(0.6) = {:.6}", power.equilibrium_bid_fixed(0.6, 3)?);

    let counts = CountDistribution::from_pairs(&[(2, 0.5), (3, 0.5)])?;
    let counted = uniform.with_rule(MixtureRule::CountWeighted);
    println!("count in {{2, 3}} with equal odds");
    for v in [0.2, 0.6, 1.0] {
        println!(
            "  v={v}  win-weighted {:.6}  count-weighted {:.6}",
            uniform.bid(v, &counts)?,
            counted.bid(v, &counts)?
        );
    }
    Ok(())
}
