//! Seller and coordinator revenue under the full protocol, with one traced
//! trial.

use bidding_clubs::environment::EnvironmentSampler;
use bidding_clubs::experiments::{revenue_accounting, ProtocolSimulator};
use bidding_clubs::rng::trial_rng;
use bidding_clubs::{BidEngine, EnvironmentConfig, MixtureRule};

fn main() -> bidding_clubs::Result<()> {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    print!("{}", revenue_accounting(&config, &engine, 100_000, 1)?.render());

    let sim = ProtocolSimulator::new(engine, &config);
    let mut rng = trial_rng(1, 0);
    let instance = EnvironmentSampler::new(&config).sample(&mut rng);
    let record = sim.run(&instance, &mut rng)?;
    println!("\n{}", serde_json::to_string_pretty(&record).expect("record serializes"));
    Ok(())
}
