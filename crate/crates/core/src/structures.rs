//! Finite information structures, exact Bayes posteriors, and the
//! symmetric permutation construction that realizes a feasible law.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, invariant, Error, Result};
use crate::feasibility::{base_law, conditional_tilt};
use crate::measures::{
    law_expected_measure, Belief, EmpiricalDistribution, Measure, PopulationLaw, Prior,
};
use crate::mps::{verify_decomposition, SpreadDecomposition};
use crate::scalar::Scalar;

/// Default bound on the number of signal profiles an expansion may emit.
pub const DEFAULT_PROFILE_BOUND: u128 = 1_000_000;

/// Samples per RNG stream in [`simulate`]. Block `k` covers samples
/// `k * SIMULATION_BLOCK ..` and draws from ChaCha8 seeded with the user
/// seed, stream `k`.
pub const SIMULATION_BLOCK: usize = 4096;

pub type Profile = Vec<String>;

/// A joint law over the state and one signal per agent, stored as the
/// prior plus, for each state, a distribution over signal profiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InformationStructure<T> {
    mu: Prior<T>,
    signal_sets: Vec<Vec<String>>,
    kernel: Vec<Vec<(Profile, T)>>,
}

impl<T: Scalar> InformationStructure<T> {
    /// Duplicate profiles within a state are merged; zero-probability
    /// profiles are dropped.
    pub fn new(
        mu: Prior<T>,
        signal_sets: Vec<Vec<String>>,
        kernel: Vec<Vec<(Profile, T)>>,
    ) -> Result<Self> {
        let n = signal_sets.len();
        if n == 0 {
            return Err(invariant("information structure needs at least one agent"));
        }
        if kernel.len() != mu.states() {
            return Err(invariant(format!(
                "kernel has {} states, prior has {}",
                kernel.len(),
                mu.states()
            )));
        }
        let sets: Vec<BTreeSet<&String>> = signal_sets.iter().map(|s| s.iter().collect()).collect();
        let mut merged_kernel = Vec::with_capacity(kernel.len());
        for (state, profiles) in kernel.into_iter().enumerate() {
            let mut merged: BTreeMap<Profile, T> = BTreeMap::new();
            for (profile, prob) in profiles {
                if profile.len() != n {
                    return Err(invariant(format!(
                        "state {state}: profile {profile:?} has {} signals for {n} agents",
                        profile.len()
                    )));
                }
                if let Some(j) = (0..n).find(|&j| !sets[j].contains(&profile[j])) {
                    return Err(invariant(format!(
                        "state {state}: signal {:?} not in agent {j}'s signal set",
                        profile[j]
                    )));
                }
                if prob.is_negative() {
                    return Err(invariant(format!("state {state}: negative probability {prob}")));
                }
                let slot = merged.entry(profile).or_insert_with(T::zero);
                *slot = slot.clone() + prob;
            }
            let total = merged.values().fold(T::zero(), |a, p| a + p.clone());
            if !total.is_one() {
                return Err(invariant(format!("state {state}: kernel sums to {total}, not 1")));
            }
            merged_kernel.push(merged.into_iter().filter(|(_, p)| !p.is_zero()).collect());
        }
        Ok(Self {
            mu,
            signal_sets,
            kernel: merged_kernel,
        })
    }

    pub fn agents(&self) -> usize {
        self.signal_sets.len()
    }

    pub fn states(&self) -> usize {
        self.mu.states()
    }

    pub fn prior(&self) -> &Prior<T> {
        &self.mu
    }

    pub fn signal_sets(&self) -> &[Vec<String>] {
        &self.signal_sets
    }

    /// Positive-probability profiles in `state` with their conditional
    /// probabilities.
    pub fn kernel(&self, state: usize) -> &[(Profile, T)] {
        &self.kernel[state]
    }

    /// `G(s_j = signal | state)`.
    pub fn signal_likelihood(&self, agent: usize, signal: &str, state: usize) -> T {
        self.kernel[state]
            .iter()
            .filter(|(profile, _)| profile[agent] == signal)
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Unconditional probability of a full profile.
    pub fn profile_probability(&self, profile: &[String]) -> T {
        (0..self.states()).fold(T::zero(), |acc, w| {
            let p = self.kernel[w]
                .iter()
                .find(|(s, _)| s.as_slice() == profile)
                .map(|(_, p)| p.clone())
                .unwrap_or_else(T::zero);
            acc + self.mu.mass(w).clone() * p
        })
    }

    /// Copy with agents `i` and `j` exchanged.
    pub fn swap_agents(&self, i: usize, j: usize) -> Self {
        let mut signal_sets = self.signal_sets.clone();
        signal_sets.swap(i, j);
        let kernel = self
            .kernel
            .iter()
            .map(|profiles| {
                let mut out: Vec<(Profile, T)> = profiles
                    .iter()
                    .map(|(s, p)| {
                        let mut s = s.clone();
                        s.swap(i, j);
                        (s, p.clone())
                    })
                    .collect();
                out.sort();
                out
            })
            .collect();
        Self {
            mu: self.mu.clone(),
            signal_sets,
            kernel,
        }
    }
}

/// Agent `agent`'s posterior after observing `signal`.
pub fn bayes_posterior<T: Scalar>(
    g: &InformationStructure<T>,
    agent: usize,
    signal: &str,
) -> Result<Belief<T>> {
    if agent >= g.agents() {
        return Err(domain(format!("agent {agent} out of range for {} agents", g.agents())));
    }
    let joint: Vec<T> = (0..g.states())
        .map(|w| g.mu.mass(w).clone() * g.signal_likelihood(agent, signal, w))
        .collect();
    let total = joint.iter().fold(T::zero(), |a, p| a + p.clone());
    if total.is_zero() {
        return Err(domain(format!(
            "signal {signal:?} has probability zero for agent {agent}"
        )));
    }
    Belief::new(joint.into_iter().map(|p| p / total.clone()).collect())
}

/// The law of the anonymous posterior profile, `sum_s G(s) delta_{H_s}`.
pub fn induced_population_law<T: Scalar>(g: &InformationStructure<T>) -> Result<PopulationLaw<T>> {
    let mut posteriors: HashMap<(usize, &str), Belief<T>> = HashMap::new();
    let mut atoms = Vec::new();
    for w in 0..g.states() {
        for (profile, prob) in g.kernel(w) {
            let beliefs = profile
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    if let Some(x) = posteriors.get(&(j, s.as_str())) {
                        return Ok(x.clone());
                    }
                    let x = bayes_posterior(g, j, s)?;
                    posteriors.insert((j, s.as_str()), x.clone());
                    Ok(x)
                })
                .collect::<Result<Vec<_>>>()?;
            let h = EmpiricalDistribution::from_profile(beliefs)?;
            atoms.push((h, g.mu.mass(w).clone() * prob.clone()));
        }
    }
    PopulationLaw::from_measure(Measure::from_weights(atoms)?)
}

/// Compact form of the permutation construction: in state `w` draw an
/// empirical distribution from `per_state[w]`, then hand its posteriors to
/// the agents in uniformly random order, each posterior serving as its own
/// signal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricScheme<T> {
    mu: Prior<T>,
    per_state: Vec<PopulationLaw<T>>,
}

impl<T: Scalar> SymmetricScheme<T> {
    pub fn new(mu: Prior<T>, per_state: Vec<PopulationLaw<T>>) -> Result<Self> {
        if per_state.len() != mu.states() {
            return Err(invariant(format!(
                "scheme has {} state laws, prior has {} states",
                per_state.len(),
                mu.states()
            )));
        }
        let scheme = Self { mu, per_state };
        let law = scheme.law()?;
        let tp = law_expected_measure(&law);
        for (w, q) in scheme.per_state.iter().enumerate() {
            let tilt = conditional_tilt(&tp, &scheme.mu, w)?;
            if law_expected_measure(q) != tilt {
                return Err(invariant(format!(
                    "state {w}: expected measure of the state law differs from the tilt"
                )));
            }
        }
        Ok(scheme)
    }

    pub fn prior(&self) -> &Prior<T> {
        &self.mu
    }

    pub fn per_state(&self) -> &[PopulationLaw<T>] {
        &self.per_state
    }

    pub fn agents(&self) -> usize {
        self.per_state[0].n()
    }

    /// The unconditional law `sum_w mu_w q_w`.
    pub fn law(&self) -> Result<PopulationLaw<T>> {
        let n = self.per_state[0].n();
        if self.per_state.iter().any(|q| q.n() != n) {
            return Err(invariant("state laws disagree on population size"));
        }
        let mixture = Measure::mixture(
            self.per_state
                .iter()
                .enumerate()
                .map(|(w, q)| (self.mu.mass(w).clone(), q.measure())),
        )?;
        PopulationLaw::from_measure(mixture)
    }
}

/// Builds the scheme realizing `p` from a verified decomposition.
pub fn synthesize<T: Scalar>(
    p: &PopulationLaw<T>,
    mu: &Prior<T>,
    d: &SpreadDecomposition<T>,
) -> Result<SymmetricScheme<T>> {
    let base = base_law(p, mu)?;
    if !verify_decomposition(p, &base, d) {
        return Err(Error::Contract(
            "decomposition does not verify against the law's base".into(),
        ));
    }
    SymmetricScheme::new(mu.clone(), d.components.iter().map(|(_, q)| q.clone()).collect())
}

fn multinomial_count(n: usize, counts: impl Iterator<Item = usize>) -> u128 {
    let mut total: u128 = 1;
    let mut placed = 0usize;
    for c in counts {
        for i in 1..=c {
            placed += 1;
            // C(placed, i) built incrementally stays integral
            total = total * placed as u128 / i as u128;
        }
    }
    debug_assert_eq!(placed, n);
    total
}

/// Distinct orderings of `items` (sorted on entry), in lexicographic order.
fn distinct_permutations(mut items: Vec<usize>) -> Vec<Vec<usize>> {
    items.sort_unstable();
    let mut out = vec![items.clone()];
    loop {
        let Some(i) = (1..items.len()).rev().find(|&i| items[i - 1] < items[i]) else {
            return out;
        };
        let j = (i..items.len()).rev().find(|&j| items[j] > items[i - 1]).expect("pivot");
        items.swap(i - 1, j);
        items[i..].reverse();
        out.push(items.clone());
    }
}

/// Explicit kernel of a scheme: each empirical distribution is spread
/// uniformly over its distinct agent orderings.
pub fn expand_scheme<T: Scalar>(
    s: &SymmetricScheme<T>,
    profile_bound: u128,
) -> Result<InformationStructure<T>> {
    let n = s.agents();
    let mut needed: u128 = 0;
    for q in &s.per_state {
        for (h, _) in q.atoms() {
            needed = needed.saturating_add(multinomial_count(n, h.counts().iter().map(|(_, c)| *c)));
        }
    }
    if needed > profile_bound {
        return Err(Error::ResourceLimit {
            what: "scheme expansion".into(),
            needed,
            bound: profile_bound,
        });
    }
    let mut labels: BTreeSet<String> = BTreeSet::new();
    let mut kernel = Vec::with_capacity(s.per_state.len());
    for q in &s.per_state {
        let mut profiles = Vec::new();
        for (h, weight) in q.atoms() {
            let names: Vec<String> = h.counts().iter().map(|(x, _)| x.label()).collect();
            labels.extend(names.iter().cloned());
            let items: Vec<usize> = h
                .counts()
                .iter()
                .enumerate()
                .flat_map(|(k, (_, c))| std::iter::repeat_n(k, *c))
                .collect();
            let orders = distinct_permutations(items);
            let each = weight.clone() / T::from_usize(orders.len());
            profiles.extend(
                orders
                    .into_iter()
                    .map(|o| (o.into_iter().map(|k| names[k].clone()).collect(), each.clone())),
            );
        }
        kernel.push(profiles);
    }
    let labels: Vec<String> = labels.into_iter().collect();
    InformationStructure::new(s.mu.clone(), vec![labels; n], kernel)
}

/// Monte-Carlo estimate of the scheme's law, single-threaded.
pub fn simulate<T: Scalar>(s: &SymmetricScheme<T>, samples: usize, seed: u64) -> Result<PopulationLaw<T>> {
    simulate_sharded(s, samples, seed, 1)
}

/// Monte-Carlo estimate with sample blocks spread over `shards` workers.
/// The result does not depend on `shards`.
pub fn simulate_sharded<T: Scalar>(
    s: &SymmetricScheme<T>,
    samples: usize,
    seed: u64,
    shards: usize,
) -> Result<PopulationLaw<T>> {
    if samples == 0 {
        return Err(domain("simulation needs at least one sample"));
    }
    let sampler = Sampler::new(s);
    let blocks = samples.div_ceil(SIMULATION_BLOCK);
    let counts = if shards <= 1 {
        let mut counts = vec![0u64; sampler.outcomes.len()];
        for block in 0..blocks {
            sampler.run_block(block, samples, seed, &mut counts);
        }
        counts
    } else {
        let per_shard = blocks.div_ceil(shards);
        (0..shards)
            .into_par_iter()
            .map(|shard| {
                let mut counts = vec![0u64; sampler.outcomes.len()];
                for block in shard * per_shard..((shard + 1) * per_shard).min(blocks) {
                    sampler.run_block(block, samples, seed, &mut counts);
                }
                counts
            })
            .reduce(
                || vec![0u64; sampler.outcomes.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    let total = T::from_usize(samples);
    let atoms = sampler
        .outcomes
        .iter()
        .zip(counts)
        .map(|(h, c)| (h.clone(), T::from_int(c as i64) / total.clone()));
    PopulationLaw::from_measure(Measure::from_weights(atoms)?)
}

struct Sampler<T> {
    outcomes: Vec<EmpiricalDistribution<T>>,
    state_cdf: Vec<f64>,
    /// Per state, cumulative probabilities and outcome indices.
    per_state: Vec<(Vec<f64>, Vec<usize>)>,
}

impl<T: Scalar> Sampler<T> {
    fn new(s: &SymmetricScheme<T>) -> Self {
        let mut outcomes: Vec<EmpiricalDistribution<T>> = s
            .per_state
            .iter()
            .flat_map(|q| q.atoms().iter().map(|(h, _)| h.clone()))
            .collect();
        outcomes.sort();
        outcomes.dedup();
        let cdf = |weights: &mut dyn Iterator<Item = &T>| {
            let mut acc = 0.0;
            weights
                .map(|w| {
                    acc += w.to_f64();
                    acc
                })
                .collect::<Vec<f64>>()
        };
        let state_cdf = cdf(&mut s.mu.belief().coords().iter());
        let per_state = s
            .per_state
            .iter()
            .map(|q| {
                let idx = q
                    .atoms()
                    .iter()
                    .map(|(h, _)| outcomes.binary_search(h).expect("collected outcome"))
                    .collect();
                (cdf(&mut q.atoms().iter().map(|(_, w)| w)), idx)
            })
            .collect();
        Self {
            outcomes,
            state_cdf,
            per_state,
        }
    }

    fn run_block(&self, block: usize, samples: usize, seed: u64, counts: &mut [u64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block as u64);
        let start = block * SIMULATION_BLOCK;
        let end = (start + SIMULATION_BLOCK).min(samples);
        for _ in start..end {
            let state = pick(&self.state_cdf, rng.random::<f64>());
            let (cdf, idx) = &self.per_state[state];
            counts[idx[pick(cdf, rng.random::<f64>())]] += 1;
        }
    }
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}
