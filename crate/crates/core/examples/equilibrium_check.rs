//! Searches singleton and club-member deviations in the reference environment.

use bidding_clubs::experiments::{verify_equilibrium, DeviatorSpec};
use bidding_clubs::{BidEngine, EnvironmentConfig, MixtureRule};

fn main() -> bidding_clubs::Result<()> {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    let spec = DeviatorSpec { bid_points: 64, misreport_points: 16, ..DeviatorSpec::standard(&config) };
    let report = verify_equilibrium(&config, &engine, &spec, 100_000, 1)?;
    print!("{}", report.summary());
    let best = report
        .rows
        .iter()
        .filter(|r| r.statistic.ends_with("gain"))
        .max_by(|a, b| (a.mean / a.stderr.max(1e-300)).total_cmp(&(b.mean / b.stderr.max(1e-300))))
        .expect("rows");
    println!("largest gain relative to its error: {} / {}: {:.3e} ± {:.1e}", best.scenario, best.statistic, best.mean, best.stderr);
    Ok(())
}
