//! Symmetric equilibrium bids in first-price auctions.
//!
//! With `n` bidders whose values are i.i.d. `F`, the equilibrium bid is
//! `b(v, n) = v - ∫_lo^v (F(u) / F(v))^(n-1) du`. For a stochastic number of
//! bidders drawn from `P` two aggregations are available:
//!
//! - [`MixtureRule::CountWeighted`]: `Σ_j p_j b(v, j)`, the plain mixture.
//! - [`MixtureRule::WinWeighted`]: `Σ_j w_j(v) b(v, j)` with
//!   `w_j(v) ∝ p_j F(v)^(j-1)`, i.e. each count is weighted by the
//!   probability that it is the count faced *given that the bidder wins*.
//!   This is the bid that makes truthful bidding a best response when the
//!   count is unknown at bidding time, and it is the engine default.
//!
//! Every bid is computed as one adaptive Simpson integral of a polynomial in
//! `F(u) / F(v)`, so the per-count bids of a mixture share a single pass.

use crate::distributions::{dominates, CountDistribution, ValuationDistribution};
use crate::error::{Error, Result};
use crate::quadrature;

/// Below this cdf value the bid is taken to be its limit, `v` itself.
pub const SINGULAR_CDF: f64 = 1e-8;

/// How per-count bids are combined under a stochastic count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixtureRule {
    /// `Σ_j p_j b(v, j)`.
    CountWeighted,
    /// `Σ_j p_j F(v)^(j-1) b(v, j) / Σ_j p_j F(v)^(j-1)`.
    #[default]
    WinWeighted,
}

impl MixtureRule {
    pub fn name(self) -> &'static str {
        match self {
            MixtureRule::CountWeighted => "count-weighted",
            MixtureRule::WinWeighted => "win-weighted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "count-weighted" => Some(MixtureRule::CountWeighted),
            "win-weighted" => Some(MixtureRule::WinWeighted),
            _ => None,
        }
    }
}

/// Count model behind a bid function.
#[derive(Debug, Clone, PartialEq)]
pub enum CountModel {
    Fixed(usize),
    Stochastic(CountDistribution),
}

/// Equilibrium bid computations for one valuation distribution.
#[derive(Debug, Clone)]
pub struct BidEngine {
    valuations: ValuationDistribution,
    rule: MixtureRule,
}

/// A bid function `v ↦ b(v, model)` bound to an engine.
#[derive(Debug, Clone)]
pub struct BidFunction {
    engine: BidEngine,
    model: CountModel,
}

/// A grid point where a dominating count distribution failed to raise the bid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub pair: usize,
    pub value: f64,
    pub bid_lo: f64,
    pub bid_hi: f64,
}

impl BidEngine {
    pub fn new(valuations: ValuationDistribution, rule: MixtureRule) -> Self {
        BidEngine { valuations, rule }
    }

    pub fn valuations(&self) -> &ValuationDistribution {
        &self.valuations
    }

    pub fn rule(&self) -> MixtureRule {
        self.rule
    }

    pub fn with_rule(&self, rule: MixtureRule) -> Self {
        BidEngine { valuations: self.valuations.clone(), rule }
    }

    /// `b(v, n)` for exactly `n` bidders.
    pub fn equilibrium_bid_fixed(&self, v: f64, n: usize) -> Result<f64> {
        self.check_value(v)?;
        if n < 2 {
            return Err(Error::invalid(format!("bidder count must be >= 2, got {n}")));
        }
        let mut coeffs = vec![0.0; n];
        coeffs[n - 1] = 1.0;
        Ok(self.shaded(v, &coeffs))
    }

    /// `Σ_j p_j b(v, j)` regardless of the engine's rule.
    pub fn equilibrium_bid_mixture(&self, v: f64, counts: &CountDistribution) -> Result<f64> {
        self.check_value(v)?;
        counts.require_auction_counts("P")?;
        let mut coeffs = vec![0.0; counts.max_count()];
        for (j, p) in counts.iter() {
            coeffs[j - 1] = p;
        }
        Ok(self.shaded(v, &coeffs))
    }

    /// Win-probability-weighted mixture regardless of the engine's rule.
    pub fn win_weighted_bid(&self, v: f64, counts: &CountDistribution) -> Result<f64> {
        self.check_value(v)?;
        counts.require_auction_counts("P")?;
        let fv = self.valuations.cdf(v);
        if fv < SINGULAR_CDF {
            return Ok(v);
        }
        // Weights relative to the smallest count; large powers underflow to 0.
        let lo = counts.min_count();
        let mut coeffs = vec![0.0; counts.max_count()];
        let mut total = 0.0;
        for (j, p) in counts.iter() {
            let w = p * fv.powi((j - lo) as i32);
            coeffs[j - 1] = w;
            total += w;
        }
        coeffs.iter_mut().for_each(|c| *c /= total);
        Ok(self.shaded(v, &coeffs))
    }

    /// Equilibrium bid under a stochastic count using the engine's rule.
    pub fn bid(&self, v: f64, counts: &CountDistribution) -> Result<f64> {
        match self.rule {
            MixtureRule::CountWeighted => self.equilibrium_bid_mixture(v, counts),
            MixtureRule::WinWeighted => self.win_weighted_bid(v, counts),
        }
    }

    pub fn bid_for(&self, v: f64, model: &CountModel) -> Result<f64> {
        match model {
            CountModel::Fixed(n) => self.equilibrium_bid_fixed(v, *n),
            CountModel::Stochastic(p) => self.bid(v, p),
        }
    }

    pub fn bid_function(&self, model: CountModel) -> BidFunction {
        BidFunction { engine: self.clone(), model }
    }

    /// Checks that strictly dominating count distributions give strictly
    /// higher bids at every grid value above the bottom of the support.
    ///
    /// Each pair is `(lower, higher)`; a pair outside the dominance relation
    /// is a precondition violation.
    pub fn verify_dominance_monotonicity(
        &self,
        pairs: &[(CountDistribution, CountDistribution)],
        v_grid: &[f64],
    ) -> Result<Vec<MonotonicityViolation>> {
        let mut violations = Vec::new();
        for (idx, (lo, hi)) in pairs.iter().enumerate() {
            if !dominates(hi, lo) {
                return Err(Error::PreconditionViolation(format!(
                    "pair {idx}: {hi:?} does not dominate {lo:?}"
                )));
            }
            for &v in v_grid.iter().filter(|v| **v > self.valuations.support_lo()) {
                let bid_lo = self.bid(v, lo)?;
                let bid_hi = self.bid(v, hi)?;
                if bid_lo >= bid_hi {
                    violations.push(MonotonicityViolation { pair: idx, value: v, bid_lo, bid_hi });
                }
            }
        }
        Ok(violations)
    }

    fn check_value(&self, v: f64) -> Result<()> {
        if !self.valuations.contains(v) {
            return Err(Error::invalid(format!(
                "value {v} outside support [{}, {}]",
                self.valuations.support_lo(),
                self.valuations.support_hi()
            )));
        }
        Ok(())
    }

    /// `v - ∫_lo^v Σ_e coeffs[e] (F(u)/F(v))^e du`.
    fn shaded(&self, v: f64, coeffs: &[f64]) -> f64 {
        let fv = self.valuations.cdf(v);
        if fv < SINGULAR_CDF {
            return v;
        }
        let f = &self.valuations;
        let integrand = |u: f64| {
            let r = f.cdf(u) / fv;
            coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
        };
        let shading = quadrature::integrate(integrand, f.support_lo(), v);
        (v - shading).clamp(f.support_lo(), v)
    }
}

impl BidFunction {
    pub fn bid(&self, v: f64) -> Result<f64> {
        self.engine.bid_for(v, &self.model)
    }

    pub fn model(&self) -> &CountModel {
        &self.model
    }

    pub fn engine(&self) -> &BidEngine {
        &self.engine
    }
}

/// `b(v, n)` under `f`.
pub fn equilibrium_bid_fixed(v: f64, n: usize, f: &ValuationDistribution) -> Result<f64> {
    BidEngine::new(f.clone(), MixtureRule::CountWeighted).equilibrium_bid_fixed(v, n)
}

/// `Σ_j p_j b(v, j)` under `f`.
pub fn equilibrium_bid_mixture(v: f64, counts: &CountDistribution, f: &ValuationDistribution) -> Result<f64> {
    BidEngine::new(f.clone(), MixtureRule::CountWeighted).equilibrium_bid_mixture(v, counts)
}
