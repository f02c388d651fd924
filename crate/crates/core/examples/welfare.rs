//! Club members gain from the club, outsiders do not lose, and expected
//! utility matches the no-coordinator benchmark.

use bidding_clubs::experiments::{compare_club_vs_disbanded, compare_nonmember_welfare, verify_utility_equivalence};
use bidding_clubs::{BidEngine, EnvironmentConfig, MixtureRule};

fn main() -> bidding_clubs::Result<()> {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    let reports = [
        compare_club_vs_disbanded(&config, &engine, 2, 100_000, 1)?,
        compare_nonmember_welfare(&config, &engine, 2, 100_000, 1)?,
        verify_utility_equivalence(&config, &engine, 2, 2, 100_000, 1)?,
    ];
    for r in &reports {
        print!("{}", r.summary());
        println!();
    }
    Ok(())
}
