//! Monte Carlo best response against equilibrium opponents with common random
//! numbers across actions.

use bidding_clubs::distributions::uniform_valuations;
use bidding_clubs::environment::CountSampler;
use bidding_clubs::mechanisms::{action_grid, best_response_value, first_price_utility};
use bidding_clubs::{BidEngine, EnvironmentConfig, MixtureRule};
use rand::Rng;

fn main() -> bidding_clubs::Result<()> {
    let posterior = EnvironmentConfig::reference().club_sizes.compose(2, 2)?;
    let v = 0.6;
    for rule in [MixtureRule::WinWeighted, MixtureRule::CountWeighted] {
        let engine = BidEngine::new(uniform_valuations(), rule);
        let sampler = CountSampler::new(&posterior);
        let grid = action_grid(v, 121);
        let br = best_response_value(
            &grid,
            200_000,
            42,
            |rng| {
                let opponents = sampler.sample(rng) - 1;
                (0..opponents).map(|_| engine.bid(rng.gen::<f64>(), &posterior).unwrap()).fold(0.0, f64::max)
            },
            |top, a| first_price_utility(v, a, *top),
        )?;
        println!(
            "{:<15} prescribed {:.4}  best grid bid {:.4}  utility {:.6} ± {:.6}",
            rule.name(),
            engine.bid(v, &posterior)?,
            br.best_action,
            br.expected_utility,
            br.standard_error
        );
    }
    Ok(())
}
