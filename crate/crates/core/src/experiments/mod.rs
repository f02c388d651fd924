//! Verification experiments.
//!
//! Monte Carlo trials draw from [`trial_rng`](crate::rng::trial_rng) with the
//! master seed and the trial index, so results do not depend on evaluation
//! order. Compared scenarios reuse the same draws.

mod equilibrium;
mod exact;
mod report;
mod revenue;
mod simulate;
mod welfare;

pub use equilibrium::{rare_event_allowance, verify_equilibrium, DeviatorRole, DeviatorSpec, SIGNIFICANCE};
pub use exact::{
    composed_expected_utility, composed_mechanism_check, dominance_check, DOMINANCE_COUNTS, INEQUALITY_COUNTS,
};
pub use report::{fmt_num, ExperimentReport, ReportRow};
pub use revenue::revenue_accounting;
pub use simulate::{AgentAction, ProtocolSimulator, TrialRecord};
pub use welfare::{
    compare_club_vs_disbanded, compare_nonmember_welfare, verify_utility_equivalence, EXACT_MARGIN, VALUE_BUCKETS,
};

use crate::distributions::ValuationDistribution;

/// Smallest trial count accepted by the Monte Carlo experiments.
pub const MIN_MONTE_CARLO_TRIALS: u64 = 10_000;

/// `points` values strictly inside the support, evenly spaced.
pub fn interior_grid(f: &ValuationDistribution, points: usize) -> Vec<f64> {
    let (lo, hi) = (f.support_lo(), f.support_hi());
    (1..=points).map(|i| lo + (hi - lo) * i as f64 / (points + 1) as f64).collect()
}
