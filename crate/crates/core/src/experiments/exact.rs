//! Tolerance-free checks: the dominance relation between club posteriors,
//! bid monotonicity under dominance, the strict welfare bid inequalities, and
//! truthfulness of the composed mechanism on a finite type grid.

use std::sync::Arc;

use crate::bid_engine::BidEngine;
use crate::distributions::dominates;
use crate::environment::EnvironmentConfig;
use crate::error::Result;
use crate::experiments::interior_grid;
use crate::experiments::report::ExperimentReport;
use crate::experiments::welfare::EXACT_MARGIN;
use crate::mechanisms::{allocation_probabilities, GridEquilibriumRule, PaymentRule};

/// Announced counts covered by the dominance check.
pub const DOMINANCE_COUNTS: std::ops::RangeInclusive<usize> = 2..=6;
/// Announced counts covered by the strict bid inequalities.
pub const INEQUALITY_COUNTS: std::ops::RangeInclusive<usize> = 2..=5;

/// Dominance of `P^{n+k-1,1}` over `P^{n,k}` and `P^{n,1}`, strictly higher
/// bids for every dominating pair on 50 interior values, and the margins of
/// the welfare bid inequalities.
pub fn dominance_check(config: &EnvironmentConfig, engine: &BidEngine) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("dominance-check", 0, 0);
    let sizes = &config.club_sizes;
    let grid = interior_grid(&config.valuations, 50);
    for n in DOMINANCE_COUNTS {
        for k in 2..=sizes.kappa() {
            let disbanded = sizes.compose(n + k - 1, 1)?;
            let club = sizes.compose(n, k)?;
            let outsider = sizes.compose(n, 1)?;
            let scenario = format!("n={n} k={k}");
            let member_pair = dominates(&disbanded, &club);
            let outsider_pair = dominates(&disbanded, &outsider);
            report.push_exact(&scenario, "P^{n+k-1,1} dominates P^{n,k}", member_pair as u8 as f64, member_pair);
            report.push_exact(&scenario, "P^{n+k-1,1} dominates P^{n,1}", outsider_pair as u8 as f64, outsider_pair);
            if member_pair && outsider_pair {
                let violations = engine.verify_dominance_monotonicity(&[(club, disbanded.clone()), (outsider, disbanded)], &grid)?;
                report.push_exact(&scenario, "bid monotonicity violations", violations.len() as f64, violations.is_empty());
            }
        }
    }
    for n in INEQUALITY_COUNTS {
        for k in 2..=sizes.kappa() {
            let disbanded = sizes.compose(n + k - 1, 1)?;
            let club = sizes.compose(n, k)?;
            let outsider = sizes.compose(n, 1)?;
            let (mut member_margin, mut outsider_margin) = (f64::INFINITY, f64::INFINITY);
            for &v in &grid {
                let top = engine.bid(v, &disbanded)?;
                member_margin = member_margin.min(top - engine.bid(v, &club)?);
                outsider_margin = outsider_margin.min(top - engine.bid(v, &outsider)?);
            }
            let scenario = format!("n={n} k={k}");
            report.push_exact(&scenario, "min b(v,P^{n+k-1,1}) - b(v,P^{n,k})", member_margin, member_margin > EXACT_MARGIN);
            report.push_exact(&scenario, "min b(v,P^{n+k-1,1}) - b(v,P^{n,1})", outsider_margin, outsider_margin > EXACT_MARGIN);
        }
    }
    Ok(report)
}

/// Exact expected utility of `agent` with true type `grid[truth]` declaring
/// `grid[declared]` in the composed mechanism, the other agents declaring
/// their types truthfully, all types uniform on the grid and independent.
pub fn composed_expected_utility(
    grid: &[f64],
    rules: &[Arc<dyn PaymentRule>],
    agent: usize,
    truth: usize,
    declared: usize,
) -> Result<f64> {
    let agents = rules.len();
    let g = grid.len();
    let profiles = g.pow(agents as u32 - 1);
    let mut total = 0.0;
    let mut declarations = vec![0.0; agents];
    for p in 0..profiles {
        let mut code = p;
        for (i, d) in declarations.iter_mut().enumerate() {
            if i == agent {
                *d = grid[declared];
            } else {
                *d = grid[code % g];
                code /= g;
            }
        }
        let win = allocation_probabilities(&declarations)[agent];
        if win > 0.0 {
            let pay = rules[agent].payment(grid[declared], agents, None)?;
            total += win * (grid[truth] - pay);
        }
    }
    Ok(total / profiles as f64)
}

/// Three agents with envelope-payment rules of different weights on an evenly
/// spaced grid over `[0, 1]`: the largest gain from any misdeclaration, and the
/// largest change in any agent's utility when the other two swap rules.
pub fn composed_mechanism_check(grid_points: usize, lambdas: [f64; 3]) -> Result<ExperimentReport> {
    let grid: Vec<f64> = (0..grid_points).map(|i| i as f64 / (grid_points - 1) as f64).collect();
    let rules: Vec<Arc<dyn PaymentRule>> = lambdas
        .iter()
        .map(|l| GridEquilibriumRule::new(grid.clone(), 2, *l).map(|r| Arc::new(r) as Arc<dyn PaymentRule>))
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new("composed-mechanism", 0, 0);
    let mut max_gain = f64::NEG_INFINITY;
    let mut max_swap = 0.0f64;
    for agent in 0..3 {
        let mut swapped = rules.clone();
        let others: Vec<usize> = (0..3).filter(|i| *i != agent).collect();
        swapped.swap(others[0], others[1]);
        for truth in 0..grid.len() {
            let honest = composed_expected_utility(&grid, &rules, agent, truth, truth)?;
            let honest_swapped = composed_expected_utility(&grid, &swapped, agent, truth, truth)?;
            max_swap = max_swap.max((honest - honest_swapped).abs());
            for declared in 0..grid.len() {
                let u = composed_expected_utility(&grid, &rules, agent, truth, declared)?;
                max_gain = max_gain.max(u - honest);
            }
        }
    }
    report.push_exact("3 agents", "max misdeclaration gain", max_gain, max_gain <= 1e-12);
    report.push_exact("3 agents", "max utility change from swapping others' rules", max_swap, max_swap <= 1e-12);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bid_engine::MixtureRule;

    #[test]
    fn reference_dominance_check_passes() {
        let c = EnvironmentConfig::reference();
        let r = dominance_check(&c, &BidEngine::new(c.valuations.clone(), MixtureRule::WinWeighted)).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn composed_mechanism_is_truthful() {
        let r = composed_mechanism_check(11, [0.0, 0.5, 1.0]).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn declared_amount_rule_is_not_truthful() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let pay_bid: Arc<dyn PaymentRule> = Arc::new(crate::mechanisms::DeclaredAmount);
        let rules = vec![pay_bid.clone(), pay_bid.clone(), pay_bid];
        let honest = composed_expected_utility(&grid, &rules, 0, 8, 8).unwrap();
        let shaded = composed_expected_utility(&grid, &rules, 0, 8, 5).unwrap();
        assert_eq!(honest, 0.0);
        assert!(shaded > 0.0);
    }
}
