//! Without identity enforcement a club member can declare low to its
//! coordinator and bid under a second name.

use bidding_clubs::club_protocol::false_name_deviation_scenario;
use bidding_clubs::distributions::uniform_valuations;
use bidding_clubs::mechanisms::action_grid;
use bidding_clubs::{BidEngine, ClubSizeDistribution, CountDistribution, EnvironmentConfig, MixtureRule};

fn main() -> bidding_clubs::Result<()> {
    let engine = BidEngine::new(uniform_valuations(), MixtureRule::WinWeighted);
    let settings = [(2, vec![(1, 0.5), (2, 0.5)]), (3, vec![(1, 0.8), (3, 0.2)])];
    for (kappa, pairs) in settings {
        let sizes = ClubSizeDistribution::new(CountDistribution::from_pairs(&pairs)?, kappa)?;
        let config = EnvironmentConfig { club_sizes: sizes, identity_enforcement: false, ..EnvironmentConfig::reference() };
        println!("kappa = {kappa}");
        for v in [0.5, 0.9] {
            let est = false_name_deviation_scenario(v, kappa, &config, &engine, &action_grid(v, 64), 200_000, 3)?;
            println!("  v={v}  gain {:+.3e} ± {:.1e}", est.gain, est.gain_stderr);
        }
    }
    Ok(())
}
