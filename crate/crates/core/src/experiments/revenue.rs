use crate::bid_engine::BidEngine;
use crate::environment::{EnvironmentConfig, EnvironmentSampler};
use crate::error::{Error, Result};
use crate::experiments::report::ExperimentReport;
use crate::experiments::simulate::ProtocolSimulator;
use crate::experiments::MIN_MONTE_CARLO_TRIALS;
use crate::mechanisms::mean_stderr;
use crate::rng::trial_rng;

#[derive(Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }
}

/// Seller and coordinator revenue under the full protocol. Every club's
/// revenue must be nonnegative in every trial and the mean coordinator
/// revenue must be positive beyond three standard errors.
pub fn revenue_accounting(config: &EnvironmentConfig, engine: &BidEngine, trials: u64, seed: u64) -> Result<ExperimentReport> {
    if trials < MIN_MONTE_CARLO_TRIALS {
        return Err(Error::invalid(format!("revenue accounting needs at least {MIN_MONTE_CARLO_TRIALS} trials")));
    }
    let sim = ProtocolSimulator::new(engine.clone(), config);
    let sampler = EnvironmentSampler::new(config);
    let (mut seller, mut coordinator, mut total) = (Moments::default(), Moments::default(), Moments::default());
    let mut negative = 0u64;
    let mut first_negative = None;
    let mut empty_club_trials_with_revenue = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let inst = sampler.sample(&mut rng);
        let rec = sim.run(&inst, &mut rng)?;
        if rec.coordinator_revenue.iter().any(|r| *r < 0.0) {
            negative += 1;
            first_negative.get_or_insert(t);
        }
        let c = rec.total_coordinator_revenue();
        if inst.clubs.iter().all(|club| club.is_singleton()) && c != 0.0 {
            empty_club_trials_with_revenue += 1;
        }
        seller.add(rec.seller_revenue);
        coordinator.add(c);
        total.add(rec.seller_revenue + c);
    }
    let mut report = ExperimentReport::new("revenue", seed, trials);
    report.push_exact("every trial", "trials with negative coordinator revenue", negative as f64, negative == 0);
    if let Some(t) = first_negative {
        report.note(format!("first negative coordinator revenue in trial {t}"));
    }
    report.push_exact(
        "clubless trials",
        "trials with nonzero coordinator revenue",
        empty_club_trials_with_revenue as f64,
        empty_club_trials_with_revenue == 0,
    );
    let (s_mean, s_se) = mean_stderr(seller.sum, seller.sum_sq, trials);
    let (c_mean, c_se) = mean_stderr(coordinator.sum, coordinator.sum_sq, trials);
    let (t_mean, t_se) = mean_stderr(total.sum, total.sum_sq, trials);
    report.push("seller", "revenue", s_mean, s_se, true);
    // validated club-size distributions always put mass on real clubs
    report.push("coordinator", "revenue", c_mean, c_se, c_mean > 3.0 * c_se);
    report.push("seller + coordinator", "revenue", t_mean, t_se, true);
    Ok(report)
}
