//! Sampling auction instances.
//!
//! A bidding-club environment draws a number of potential coordinators from
//! `gamma_C`, then an independent club size from `gamma_A` for each of them,
//! then i.i.d. valuations. A potential coordinator with a single agent is a
//! singleton bidder. Every agent's signal is the size of its own club.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::distributions::{ClubSizeDistribution, CountDistribution, ValuationDistribution};
use crate::error::{Error, Result};
use crate::mechanisms::AgentId;
use crate::rng::seeded;

/// The bidding-club economic environment.
#[derive(Debug, Clone)]
pub struct EnvironmentConfig {
    /// `gamma_C`: number of potential coordinators, no mass below 2.
    pub coordinator_counts: CountDistribution,
    /// `gamma_A` with its cap `kappa`.
    pub club_sizes: ClubSizeDistribution,
    pub valuations: ValuationDistribution,
    /// Whether the center can tie every bid to a single identity.
    pub identity_enforcement: bool,
}

impl EnvironmentConfig {
    pub fn new(
        coordinator_counts: CountDistribution,
        club_sizes: ClubSizeDistribution,
        valuations: ValuationDistribution,
        identity_enforcement: bool,
    ) -> Result<Self> {
        if coordinator_counts.min_count() < 2 {
            return Err(Error::invalid(format!(
                "gamma_C({}) must be 0: every auction has at least two potential coordinators",
                coordinator_counts.min_count()
            )));
        }
        Ok(EnvironmentConfig { coordinator_counts, club_sizes, valuations, identity_enforcement })
    }

    /// Uniform values, `gamma_A = {1: 0.5, 2: 0.5}`, `gamma_C = {2: 0.5, 3: 0.5}`.
    pub fn reference() -> Self {
        let sizes = CountDistribution::from_pairs(&[(1, 0.5), (2, 0.5)]).expect("valid pmf");
        let coords = CountDistribution::from_pairs(&[(2, 0.5), (3, 0.5)]).expect("valid pmf");
        EnvironmentConfig {
            coordinator_counts: coords,
            club_sizes: ClubSizeDistribution::from_sizes(sizes).expect("valid club sizes"),
            valuations: crate::distributions::uniform_valuations(),
            identity_enforcement: true,
        }
    }
}

/// Private type of an agent: valuation and club-size signal (`None` is the
/// null signal of an environment without coordinators).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentType {
    pub value: f64,
    pub signal: Option<usize>,
}

/// Agents attached to one potential coordinator. A single member means the
/// coordinator is not actualized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Club {
    pub id: usize,
    pub members: Vec<AgentId>,
}

impl Club {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// A sampled environment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuctionInstance {
    pub clubs: Vec<Club>,
    /// Indexed by `AgentId.0`.
    pub agents: Vec<AgentType>,
}

impl AuctionInstance {
    /// Builds an instance with agents numbered consecutively club by club.
    pub fn from_club_sizes(sizes: &[usize], values: Vec<f64>) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if values.len() != total {
            return Err(Error::invalid(format!("{} values for {total} agents", values.len())));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("clubs must have at least one member"));
        }
        let mut clubs = Vec::with_capacity(sizes.len());
        let mut agents = Vec::with_capacity(total);
        for (id, &size) in sizes.iter().enumerate() {
            let first = agents.len();
            let members = (first..first + size).map(AgentId).collect();
            for v in &values[first..first + size] {
                agents.push(AgentType { value: *v, signal: Some(size) });
            }
            clubs.push(Club { id, members });
        }
        Ok(AuctionInstance { clubs, agents })
    }

    pub fn n_potential_coordinators(&self) -> usize {
        self.clubs.len()
    }

    pub fn total_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, id: AgentId) -> &AgentType {
        &self.agents[id.0]
    }

    pub fn club_of(&self, id: AgentId) -> Option<&Club> {
        self.clubs.iter().find(|c| c.members.contains(&id))
    }

    /// The instance where club `index` never forms and its members take part
    /// as singletons. Agent ids and values are unchanged.
    pub fn disband(&self, index: usize) -> Result<AuctionInstance> {
        let club = self.clubs.get(index).ok_or_else(|| Error::invalid(format!("no club at index {index}")))?;
        let mut next_id = self.clubs.iter().map(|c| c.id).max().unwrap_or(0) + 1;
        let mut clubs = Vec::with_capacity(self.clubs.len() + club.size());
        for (i, c) in self.clubs.iter().enumerate() {
            if i != index {
                clubs.push(c.clone());
                continue;
            }
            for (j, m) in c.members.iter().enumerate() {
                let id = if j == 0 { c.id } else { next_id };
                if j > 0 {
                    next_id += 1;
                }
                clubs.push(Club { id, members: vec![*m] });
            }
        }
        let mut agents = self.agents.clone();
        for m in &club.members {
            agents[m.0].signal = Some(1);
        }
        Ok(AuctionInstance { clubs, agents })
    }

    /// All agents as singletons with the null signal: the same agents and
    /// values in an environment without coordinators.
    pub fn flatten(&self) -> AuctionInstance {
        let clubs = (0..self.agents.len()).map(|i| Club { id: i, members: vec![AgentId(i)] }).collect();
        let agents = self.agents.iter().map(|a| AgentType { value: a.value, signal: None }).collect();
        AuctionInstance { clubs, agents }
    }

    /// Hex SHA-256 of the serialized instance.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instance serializes");
        hex(&Sha256::digest(bytes))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Pre-built samplers for one environment.
#[derive(Debug, Clone)]
pub struct EnvironmentSampler {
    config: EnvironmentConfig,
    coordinators: CountSampler,
    sizes: CountSampler,
}

/// Draws counts from a [`CountDistribution`].
#[derive(Debug, Clone)]
pub struct CountSampler {
    min_count: usize,
    index: WeightedIndex<f64>,
}

impl CountSampler {
    pub fn new(counts: &CountDistribution) -> Self {
        CountSampler {
            min_count: counts.min_count(),
            index: WeightedIndex::new(counts.probabilities()).expect("validated pmf has positive mass"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.min_count + self.index.sample(rng)
    }
}

impl EnvironmentSampler {
    pub fn new(config: &EnvironmentConfig) -> Self {
        EnvironmentSampler {
            config: config.clone(),
            coordinators: CountSampler::new(&config.coordinator_counts),
            sizes: CountSampler::new(config.club_sizes.sizes()),
        }
    }

    pub fn config(&self) -> &EnvironmentConfig {
        &self.config
    }

    pub fn coordinator_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.coordinators.sample(rng)
    }

    pub fn club_size<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sizes.sample(rng)
    }

    pub fn value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.config.valuations.sample(rng)
    }

    /// Draws `n_c`, then every club size, then every valuation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AuctionInstance {
        let n = self.coordinator_count(rng);
        self.sample_with_fixed(&[], n, rng)
    }

    /// Like [`sample`](Self::sample) but the first clubs have the given sizes.
    /// `n_c` is drawn from `gamma_C` and must cover the fixed clubs; otherwise
    /// the fixed clubs are simply placed and no further clubs are drawn.
    pub fn sample_with_leading<R: Rng + ?Sized>(&self, leading: &[usize], rng: &mut R) -> AuctionInstance {
        let n = self.coordinator_count(rng).max(leading.len());
        self.sample_with_fixed(leading, n, rng)
    }

    /// Exactly `n_coordinators` potential coordinators, the first ones with the
    /// given sizes.
    pub fn sample_with_fixed<R: Rng + ?Sized>(&self, leading: &[usize], n_coordinators: usize, rng: &mut R) -> AuctionInstance {
        let mut sizes = leading.to_vec();
        while sizes.len() < n_coordinators {
            sizes.push(self.club_size(rng));
        }
        let total: usize = sizes.iter().sum();
        let values = (0..total).map(|_| self.value(rng)).collect();
        AuctionInstance::from_club_sizes(&sizes, values).expect("sizes and values agree")
    }
}

/// Samples an instance of the bidding-club environment.
pub fn sample_instance(config: &EnvironmentConfig, seed: u64) -> AuctionInstance {
    EnvironmentSampler::new(config).sample(&mut seeded(seed))
}

/// Posterior over the total agent count of an agent with signal `own_signal`
/// after `n_announced` registrants are announced: `P^{n,k}`.
pub fn belief_distribution(n_announced: usize, own_signal: usize, config: &EnvironmentConfig) -> Result<CountDistribution> {
    config.club_sizes.compose(n_announced, own_signal)
}

/// Environment without coordinators: the agent count is drawn from
/// `count_model`, everyone is a singleton and receives the null signal.
pub fn baseline_stochastic_instance(
    count_model: &CountDistribution,
    valuations: &ValuationDistribution,
    seed: u64,
) -> Result<AuctionInstance> {
    count_model.require_auction_counts("count model")?;
    let mut rng = seeded(seed);
    let n = CountSampler::new(count_model).sample(&mut rng);
    let values = (0..n).map(|_| valuations.sample(&mut rng)).collect();
    Ok(AuctionInstance::from_club_sizes(&vec![1; n], values)?.flatten())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(pairs: &[(usize, f64)]) -> CountDistribution {
        CountDistribution::from_pairs(pairs).unwrap()
    }

    fn two_coordinators() -> EnvironmentConfig {
        let mut c = EnvironmentConfig::reference();
        c.coordinator_counts = CountDistribution::point_mass(2);
        c
    }

    #[test]
    fn rejects_single_coordinator_mass() {
        let r = EnvironmentConfig::reference();
        let err = EnvironmentConfig::new(pmf(&[(1, 0.5), (2, 0.5)]), r.club_sizes, r.valuations, true).unwrap_err();
        assert!(err.to_string().contains("gamma_C(1)"));
    }

    #[test]
    fn support_arithmetic() {
        let config = two_coordinators();
        for seed in 0..200 {
            let inst = sample_instance(&config, seed);
            assert_eq!(inst.n_potential_coordinators(), 2);
            assert!((2..=4).contains(&inst.total_agents()));
            for club in &inst.clubs {
                assert!((1..=2).contains(&club.size()));
                for m in &club.members {
                    assert_eq!(inst.agent(*m).signal, Some(club.size()));
                }
            }
            let total: usize = inst.clubs.iter().map(Club::size).sum();
            assert_eq!(total, inst.total_agents());
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let config = EnvironmentConfig::reference();
        assert_eq!(sample_instance(&config, 42), sample_instance(&config, 42));
        assert_eq!(sample_instance(&config, 42).digest(), sample_instance(&config, 42).digest());
    }

    #[test]
    fn club_size_frequencies() {
        let config = EnvironmentConfig::reference();
        let sampler = EnvironmentSampler::new(&config);
        let mut rng = seeded(17);
        let draws = 100_000;
        let ones = (0..draws).filter(|_| sampler.club_size(&mut rng) == 1).count() as f64;
        let p = 0.5;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((ones / draws as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn belief_examples() {
        let config = two_coordinators();
        let b = belief_distribution(2, 1, &config).unwrap();
        assert_eq!(b, pmf(&[(2, 0.5), (3, 0.5)]));
        for n in 2..6 {
            for k in 1..=2 {
                assert_eq!(belief_distribution(n, k, &config).unwrap().min_count(), n + k - 1);
            }
        }
    }

    #[test]
    fn baseline_instances() {
        let f = crate::distributions::uniform_valuations();
        for seed in 0..20 {
            let inst = baseline_stochastic_instance(&CountDistribution::point_mass(3), &f, seed).unwrap();
            assert_eq!(inst.total_agents(), 3);
            assert!(inst.clubs.iter().all(Club::is_singleton));
            assert!(inst.agents.iter().all(|a| a.signal.is_none()));
        }
        assert!(baseline_stochastic_instance(&pmf(&[(1, 0.5), (2, 0.5)]), &f, 0).is_err());
    }

    #[test]
    fn baseline_count_frequencies() {
        let config = two_coordinators();
        let model = config.club_sizes.compose(2, 2).unwrap();
        let trials = 100_000u64;
        let threes = (0..trials)
            .filter(|s| baseline_stochastic_instance(&model, &config.valuations, *s).unwrap().total_agents() == 3)
            .count() as f64;
        let se = (0.25 / trials as f64).sqrt();
        assert!((threes / trials as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn disband_and_flatten_keep_agents() {
        let inst = AuctionInstance::from_club_sizes(&[2, 1, 3], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let d = inst.disband(2).unwrap();
        assert_eq!(d.n_potential_coordinators(), 5);
        assert_eq!(d.agents.iter().map(|a| a.value).collect::<Vec<_>>(), inst.agents.iter().map(|a| a.value).collect::<Vec<_>>());
        assert!(d.agents[3..].iter().all(|a| a.signal == Some(1)));
        assert_eq!(d.agents[0].signal, Some(2));
        let ids: std::collections::BTreeSet<usize> = d.clubs.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), 5);
        let flat = inst.flatten();
        assert_eq!(flat.n_potential_coordinators(), 6);
        assert!(flat.agents.iter().all(|a| a.signal.is_none()));
        assert!(inst.disband(9).is_err());
    }

    #[test]
    fn relabeling_is_invisible_to_counts() {
        let a = AuctionInstance::from_club_sizes(&[2, 1], vec![0.3, 0.9, 0.5]).unwrap();
        let b = AuctionInstance::from_club_sizes(&[1, 2], vec![0.5, 0.3, 0.9]).unwrap();
        let sizes = |i: &AuctionInstance| {
            let mut s: Vec<usize> = i.clubs.iter().map(Club::size).collect();
            s.sort();
            s
        };
        assert_eq!(sizes(&a), sizes(&b));
        let mut va: Vec<f64> = a.agents.iter().map(|x| x.value).collect();
        let mut vb: Vec<f64> = b.agents.iter().map(|x| x.value).collect();
        va.sort_by(f64::total_cmp);
        vb.sort_by(f64::total_cmp);
        assert_eq!(va, vb);
    }
}
