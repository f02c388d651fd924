//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::time::{Duration, Instant};

use bidding_clubs::cli::{execute, Experiment, RunConfig};
use bidding_clubs::distributions::{dominates, power_valuations, uniform_valuations};
use bidding_clubs::experiments::{
    composed_mechanism_check, revenue_accounting, verify_equilibrium, verify_utility_equivalence, DeviatorSpec,
    ExperimentReport,
};
use bidding_clubs::{BidEngine, ClubSizeDistribution, CountDistribution, EnvironmentConfig, MixtureRule, ValuationDistribution};

const SEED: u64 = 20_240_601;
const TRIALS: u64 = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn from_report(r: &ExperimentReport) -> Outcome {
    let detail = match r.violations.first() {
        None => format!("{} rows, no violations", r.rows.len()),
        Some(v) => format!("{} violations, first: {v}", r.violations.len()),
    };
    outcome(r.passed(), detail)
}

/// 100 values on [0, 1] including both ends.
fn value_grid() -> Vec<f64> {
    (0..100).map(|i| i as f64 / 99.0).collect()
}

fn interior(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}

/// `{1: p, 2: 1 - p}` with cap `kappa`, for p in {0.1, 0.5, 0.9} and kappa in {2, 3, 4}.
fn club_size_families() -> Vec<(String, ClubSizeDistribution)> {
    let mut out = Vec::new();
    for p in [0.1, 0.5, 0.9] {
        for kappa in [2, 3, 4] {
            let sizes = CountDistribution::from_pairs(&[(1, p), (2, 1.0 - p)]).unwrap();
            out.push((format!("p={p} kappa={kappa}"), ClubSizeDistribution::new(sizes, kappa).unwrap()));
        }
    }
    out
}

fn fixed_oracle(f: &ValuationDistribution, factor: impl Fn(usize) -> f64) -> Outcome {
    let engine = BidEngine::new(f.clone(), MixtureRule::WinWeighted);
    let mut worst: f64 = 0.0;
    for n in 2..=10 {
        for v in value_grid() {
            let b = engine.equilibrium_bid_fixed(v, n).unwrap();
            worst = worst.max((b - factor(n) * v).abs());
        }
    }
    outcome(worst < 1e-9, format!("max abs error {worst:.3e}"))
}

fn criterion_1() -> Outcome {
    fixed_oracle(&uniform_valuations(), |n| (n - 1) as f64 / n as f64)
}

fn criterion_2() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for alpha in [0.5, 2.0, 3.0] {
        let o = fixed_oracle(&power_valuations(alpha).unwrap(), |n| {
            let a = alpha * (n - 1) as f64;
            a / (a + 1.0)
        });
        pass &= o.pass;
        details.push(format!("alpha={alpha}: {}", o.detail));
    }
    outcome(pass, details.join("; "))
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (name, sizes) in club_size_families() {
        for n in 2..=6 {
            for k in 2..=sizes.kappa() {
                checked += 1;
                if !dominates(&sizes.compose(n + k - 1, 1).unwrap(), &sizes.compose(n, k).unwrap()) {
                    failures.push(format!("{name} n={n} k={k}"));
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} pairs, failures: {failures:?}"))
}

fn valuation_families() -> Vec<ValuationDistribution> {
    vec![
        uniform_valuations(),
        power_valuations(0.5).unwrap(),
        power_valuations(2.0).unwrap(),
        power_valuations(3.0).unwrap(),
    ]
}

fn criterion_4() -> Outcome {
    let grid = interior(50);
    let mut violations = 0;
    let mut pairs_checked = 0;
    for f in valuation_families() {
        for rule in [MixtureRule::WinWeighted, MixtureRule::CountWeighted] {
            let engine = BidEngine::new(f.clone(), rule);
            for (_, sizes) in club_size_families() {
                let mut pairs = Vec::new();
                for n in 2..=6 {
                    for k in 2..=sizes.kappa() {
                        let top = sizes.compose(n + k - 1, 1).unwrap();
                        pairs.push((sizes.compose(n, k).unwrap(), top.clone()));
                        pairs.push((sizes.compose(n, 1).unwrap(), top));
                    }
                }
                pairs_checked += pairs.len();
                violations += engine.verify_dominance_monotonicity(&pairs, &grid).unwrap().len();
            }
        }
    }
    outcome(violations == 0, format!("{pairs_checked} pairs x 50 values, {violations} violations"))
}

fn criterion_5() -> Outcome {
    let r = composed_mechanism_check(21, [0.0, 0.5, 1.0]).unwrap();
    let detail = r.rows.iter().map(|row| format!("{} = {:.3e}", row.statistic, row.mean)).collect::<Vec<_>>().join("; ");
    outcome(r.passed(), detail)
}

fn criterion_6() -> Outcome {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    let spec = DeviatorSpec::standard(&config);
    from_report(&verify_equilibrium(&config, &engine, &spec, TRIALS, SEED).unwrap())
}

/// Smallest member and outsider margins `b(v, P^{n+k-1,1}) - b(v, P)` over all
/// club-size families, both mixture rules and nonzero grid values.
fn welfare_margins(f: &ValuationDistribution) -> (f64, f64) {
    let grid: Vec<f64> = value_grid().into_iter().filter(|v| *v > 0.0).collect();
    let mut min_member = f64::INFINITY;
    let mut min_outsider = f64::INFINITY;
    for rule in [MixtureRule::WinWeighted, MixtureRule::CountWeighted] {
        let engine = BidEngine::new(f.clone(), rule);
        for (_, sizes) in club_size_families() {
            for n in 2..=5 {
                for k in 2..=sizes.kappa() {
                    let top = sizes.compose(n + k - 1, 1).unwrap();
                    let club = sizes.compose(n, k).unwrap();
                    let outsider = sizes.compose(n, 1).unwrap();
                    for &v in &grid {
                        let b_top = engine.bid(v, &top).unwrap();
                        min_member = min_member.min(b_top - engine.bid(v, &club).unwrap());
                        min_outsider = min_outsider.min(b_top - engine.bid(v, &outsider).unwrap());
                    }
                }
            }
        }
    }
    (min_member, min_outsider)
}

/// Margins above 1e-9 on the uniform reference. Power families must stay
/// strictly positive; their win-weighted margins near v = 0 shrink like
/// F(v)^(j-1) and fall below 1e-9 analytically.
fn criterion_7() -> Outcome {
    let (member, outsider) = welfare_margins(&uniform_valuations());
    let mut pass = member > 1e-9 && outsider > 1e-9;
    let mut details = vec![format!("uniform: member {member:.3e}, outsider {outsider:.3e}")];
    for alpha in [0.5, 2.0, 3.0] {
        let (member, outsider) = welfare_margins(&power_valuations(alpha).unwrap());
        pass &= member > 0.0 && outsider > 0.0;
        details.push(format!("alpha={alpha}: member {member:.3e}, outsider {outsider:.3e}"));
    }
    outcome(pass, format!("min margins {}", details.join("; ")))
}

fn criterion_8() -> Outcome {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    from_report(&verify_utility_equivalence(&config, &engine, 2, 2, TRIALS, SEED).unwrap())
}

fn criterion_9() -> Outcome {
    let config = EnvironmentConfig::reference();
    let engine = BidEngine::new(config.valuations.clone(), MixtureRule::WinWeighted);
    from_report(&revenue_accounting(&config, &engine, TRIALS, SEED).unwrap())
}

fn criterion_10() -> Outcome {
    let mut identical = true;
    let mut names = Vec::new();
    for experiment in [Experiment::Equilibrium, Experiment::UtilityEquivalence, Experiment::Revenue, Experiment::BidTable] {
        let mut cfg = RunConfig::reference(experiment);
        cfg.trials = 20_000;
        cfg.seed = SEED;
        let a = execute(&cfg).unwrap().body();
        let b = execute(&cfg).unwrap().body();
        identical &= a.as_bytes() == b.as_bytes();
        names.push(experiment.name());
    }
    outcome(identical, format!("byte-identical bodies for {}", names.join(", ")))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("uniform closed-form bid oracle", Duration::from_secs(1), criterion_1),
        ("power-family bid oracle", Duration::from_secs(5), criterion_2),
        ("club posterior dominance", Duration::from_secs(1), criterion_3),
        ("bid monotonicity under dominance", Duration::from_secs(10), criterion_4),
        ("composed mechanism truthfulness", Duration::from_secs(30), criterion_5),
        ("no profitable deviation (Monte Carlo)", Duration::from_secs(300), criterion_6),
        ("strict welfare bid inequalities", Duration::from_secs(10), criterion_7),
        ("payment identity and utility equivalence", Duration::from_secs(300), criterion_8),
        ("coordinator solvency and profit", Duration::from_secs(300), criterion_9),
        ("reproducible reports", Duration::from_secs(300), criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<42} {}  ({:.2} s of {} s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
