//! Valuation distributions and participant-count distributions.
//!
//! Count distributions are finite pmfs indexed from a minimum count. The
//! club-induced posterior `P^{n,k}` is built by exact iterated convolution of
//! the club-size distribution, and count distributions are compared with the
//! strict tail-mass order used throughout the equilibrium analysis.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance for pmf equality and zero comparisons.
pub const PMF_TOLERANCE: f64 = 1e-12;

const INVERSE_CDF_TOLERANCE: f64 = 1e-12;

type RealMap = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied continuous distribution on a bounded interval.
pub struct CustomValuation {
    name: String,
    lo: f64,
    hi: f64,
    cdf: Box<RealMap>,
    pdf: Box<RealMap>,
}

/// Continuous, atomless distribution of private valuations on a bounded support.
#[derive(Clone)]
pub enum ValuationDistribution {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// `F(v) = v^alpha` on `[0, 1]`.
    Power { alpha: f64 },
    /// Arbitrary cdf/pdf pair; the inverse cdf is found by bisection.
    Custom(Arc<CustomValuation>),
}

/// Uniform valuations on `[0, 1]`.
pub fn uniform_valuations() -> ValuationDistribution {
    ValuationDistribution::Uniform { lo: 0.0, hi: 1.0 }
}

/// `F(v) = v^alpha` on `[0, 1]`.
pub fn power_valuations(alpha: f64) -> Result<ValuationDistribution> {
    ValuationDistribution::power(alpha)
}

impl ValuationDistribution {
    pub fn uniform_on(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("uniform support [{lo}, {hi}] must be a finite interval with lo < hi")));
        }
        Ok(ValuationDistribution::Uniform { lo, hi })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("power exponent must be > 0, got {alpha}")));
        }
        Ok(ValuationDistribution::Power { alpha })
    }

    /// Wraps an arbitrary cdf/pdf pair on `[lo, hi]`.
    ///
    /// The cdf must be continuous and nondecreasing with `cdf(lo) = 0` and
    /// `cdf(hi) = 1`; the endpoint conditions are checked here.
    pub fn custom<C, D>(name: impl Into<String>, lo: f64, hi: f64, cdf: C, pdf: D) -> Result<Self>
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("support [{lo}, {hi}] must be a finite interval with lo < hi")));
        }
        let (c0, c1) = (cdf(lo), cdf(hi));
        if c0.abs() > PMF_TOLERANCE || (c1 - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::invalid(format!("cdf must be 0 at {lo} and 1 at {hi}, got {c0} and {c1}")));
        }
        Ok(ValuationDistribution::Custom(Arc::new(CustomValuation {
            name: name.into(),
            lo,
            hi,
            cdf: Box::new(cdf),
            pdf: Box::new(pdf),
        })))
    }

    pub fn support_lo(&self) -> f64 {
        match self {
            ValuationDistribution::Uniform { lo, .. } => *lo,
            ValuationDistribution::Power { .. } => 0.0,
            ValuationDistribution::Custom(c) => c.lo,
        }
    }

    pub fn support_hi(&self) -> f64 {
        match self {
            ValuationDistribution::Uniform { hi, .. } => *hi,
            ValuationDistribution::Power { .. } => 1.0,
            ValuationDistribution::Custom(c) => c.hi,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.support_lo() && v <= self.support_hi()
    }

    /// Clamps `v` into the support.
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.support_lo(), self.support_hi())
    }

    pub fn cdf(&self, v: f64) -> f64 {
        let (lo, hi) = (self.support_lo(), self.support_hi());
        if v <= lo {
            return 0.0;
        }
        if v >= hi {
            return 1.0;
        }
        match self {
            ValuationDistribution::Uniform { lo, hi } => (v - lo) / (hi - lo),
            ValuationDistribution::Power { alpha } => v.powf(*alpha),
            ValuationDistribution::Custom(c) => (c.cdf)(v).clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if !self.contains(v) {
            return 0.0;
        }
        match self {
            ValuationDistribution::Uniform { lo, hi } => 1.0 / (hi - lo),
            ValuationDistribution::Power { alpha } => alpha * v.powf(alpha - 1.0),
            ValuationDistribution::Custom(c) => (c.pdf)(v),
        }
    }

    /// Quantile function. Arguments outside `[0, 1]` are clamped.
    pub fn inverse_cdf(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            ValuationDistribution::Uniform { lo, hi } => lo + p * (hi - lo),
            ValuationDistribution::Power { alpha } => p.powf(1.0 / alpha),
            ValuationDistribution::Custom(c) => {
                let (mut a, mut b) = (c.lo, c.hi);
                while b - a > INVERSE_CDF_TOLERANCE {
                    let m = 0.5 * (a + b);
                    if (c.cdf)(m) < p {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.gen::<f64>())
    }

    /// Config-file spelling, e.g. `uniform 0 1` or `power 2`.
    pub fn describe(&self) -> String {
        match self {
            ValuationDistribution::Uniform { lo, hi } => format!("uniform {lo} {hi}"),
            ValuationDistribution::Power { alpha } => format!("power {alpha}"),
            ValuationDistribution::Custom(c) => format!("custom {} {} {}", c.name, c.lo, c.hi),
        }
    }
}

impl fmt::Debug for ValuationDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ValuationDistribution({})", self.describe())
    }
}

/// Finite pmf over participant counts, indexed from `min_count`.
///
/// Leading and trailing zero entries are trimmed at construction, so
/// `min_count` and `max_count` are support points with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    min_count: usize,
    probs: Vec<f64>,
}

impl CountDistribution {
    pub fn new(min_count: usize, probs: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(format!("p({}) = {p} is not a nonnegative probability", min_count + i)));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self::trimmed(min_count, probs))
    }

    /// Builds a pmf from `(count, probability)` pairs in any order.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        let lo = pairs.iter().map(|(c, _)| *c).min().ok_or_else(|| Error::invalid("empty pmf"))?;
        let hi = pairs.iter().map(|(c, _)| *c).max().unwrap_or(lo);
        let mut probs = vec![0.0; hi - lo + 1];
        let mut seen = vec![false; probs.len()];
        for &(c, p) in pairs {
            if seen[c - lo] {
                return Err(Error::invalid(format!("count {c} listed twice")));
            }
            seen[c - lo] = true;
            probs[c - lo] = p;
        }
        Self::new(lo, probs)
    }

    pub fn point_mass(count: usize) -> Self {
        CountDistribution { min_count: count, probs: vec![1.0] }
    }

    // Skips validation; callers guarantee a valid pmf.
    fn trimmed(min_count: usize, mut probs: Vec<f64>) -> Self {
        let first = probs.iter().position(|p| *p != 0.0).unwrap_or(0);
        let last = probs.iter().rposition(|p| *p != 0.0).unwrap_or(0);
        probs.truncate(last + 1);
        probs.drain(..first);
        CountDistribution { min_count: min_count + first, probs }
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn max_count(&self) -> usize {
        self.min_count + self.probs.len() - 1
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn pmf(&self, count: usize) -> f64 {
        count
            .checked_sub(self.min_count)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(count, probability)` pairs in increasing count order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, p)| (self.min_count + i, *p))
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(c, p)| c as f64 * p).sum()
    }

    /// Mass at counts `>= i`.
    pub fn tail_mass(&self, i: usize) -> f64 {
        if i <= self.min_count {
            return self.total_mass();
        }
        self.probs.iter().skip(i - self.min_count).sum()
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &CountDistribution) -> CountDistribution {
        let mut out = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, a) in self.probs.iter().enumerate() {
            for (j, b) in other.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::trimmed(self.min_count + other.min_count, out)
    }

    /// Adds `by` sure participants.
    pub fn shift(&self, by: usize) -> CountDistribution {
        CountDistribution { min_count: self.min_count + by, probs: self.probs.clone() }
    }

    /// The pmf mixture `weight * self + (1 - weight) * other`.
    pub fn mixture(&self, weight: f64, other: &CountDistribution) -> Result<CountDistribution> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid(format!("mixture weight {weight} outside [0, 1]")));
        }
        let lo = self.min_count.min(other.min_count);
        let hi = self.max_count().max(other.max_count());
        let probs = (lo..=hi).map(|c| weight * self.pmf(c) + (1.0 - weight) * other.pmf(c)).collect();
        Ok(Self::trimmed(lo, probs))
    }

    /// Fails unless the pmf puts no mass below two participants.
    pub fn require_auction_counts(&self, name: &str) -> Result<()> {
        if self.min_count < 2 {
            return Err(Error::invalid(format!(
                "{name}({}) = {} but a first-price auction needs at least two participants",
                self.min_count, self.probs[0]
            )));
        }
        Ok(())
    }
}

impl Serialize for CountDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Mass of `p` at counts `>= i`.
pub fn tail_mass(p: &CountDistribution, i: usize) -> f64 {
    p.tail_mass(i)
}

pub fn convolve(a: &CountDistribution, b: &CountDistribution) -> CountDistribution {
    a.convolve(b)
}

/// Strict tail-mass order: true iff `lo < hi`.
///
/// There must be an index `l` such that the tails of both pmfs agree below
/// `l` and the tail of `hi` is strictly larger at every index from `l` up to
/// the largest support point of `hi`. Beyond that point the tail of `hi` is
/// zero, so `lo` must not have mass there either. Comparisons use
/// [`PMF_TOLERANCE`].
pub fn dominates(hi: &CountDistribution, lo: &CountDistribution) -> bool {
    let top = hi.max_count();
    if lo.max_count() > top {
        return false;
    }
    let Some(l) = (0..=top).find(|&i| (hi.tail_mass(i) - lo.tail_mass(i)).abs() > PMF_TOLERANCE) else {
        return false;
    };
    (l..=top).all(|i| hi.tail_mass(i) - lo.tail_mass(i) > PMF_TOLERANCE)
}

/// Per-coordinator club-size distribution with its size cap `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClubSizeDistribution {
    sizes: CountDistribution,
    kappa: usize,
}

impl ClubSizeDistribution {
    pub fn new(sizes: CountDistribution, kappa: usize) -> Result<Self> {
        if sizes.min_count() == 0 {
            return Err(Error::invalid("gamma_A(0) must be 0: every potential coordinator has at least one agent"));
        }
        if sizes.pmf(1) >= 1.0 - PMF_TOLERANCE {
            return Err(Error::invalid("gamma_A(1) must be < 1: some club must have two or more members"));
        }
        if kappa < 2 {
            return Err(Error::invalid(format!("kappa must be >= 2, got {kappa}")));
        }
        if sizes.max_count() > kappa {
            return Err(Error::invalid(format!(
                "gamma_A({}) > 0 exceeds the club size cap kappa = {kappa}",
                sizes.max_count()
            )));
        }
        Ok(ClubSizeDistribution { sizes, kappa })
    }

    /// Uses the largest support point as `kappa`.
    pub fn from_sizes(sizes: CountDistribution) -> Result<Self> {
        let kappa = sizes.max_count();
        Self::new(sizes, kappa)
    }

    pub fn sizes(&self) -> &CountDistribution {
        &self.sizes
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Posterior over the total number of agents given `n` registrants in the
    /// main auction and an own club of size `k`: `k` plus the sum of `n - 1`
    /// independent club-size draws.
    pub fn compose(&self, n: usize, k: usize) -> Result<CountDistribution> {
        if n < 2 {
            return Err(Error::invalid(format!("announced count must be >= 2, got {n}")));
        }
        if k < 1 || k > self.kappa {
            return Err(Error::invalid(format!("own club size must be in 1..={}, got {k}", self.kappa)));
        }
        let mut out = CountDistribution::point_mass(k);
        for _ in 1..n {
            out = out.convolve(&self.sizes);
        }
        Ok(out)
    }
}

/// See [`ClubSizeDistribution::compose`].
pub fn compose_count_distribution(n: usize, k: usize, club_sizes: &ClubSizeDistribution) -> Result<CountDistribution> {
    club_sizes.compose(n, k)
}
