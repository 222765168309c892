#![allow(dead_code)]

use popbelief::measures::{self, barycenter, law_expected_measure, Belief, Measure};
use popbelief::{EmpiricalDistribution, PopulationLaw, Prior, Rational, Scalar, ScalarMeasure};
use rand::Rng;

pub fn r(s: &str) -> Rational {
    Rational::parse_exact(s).unwrap_or_else(|| panic!("bad literal {s}"))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::from_frac(num, den)
}

pub fn b(p: &str) -> measures::Belief<Rational> {
    Belief::binary(r(p)).unwrap()
}

/// Uniform law over `i / n` for `i` in `lo..=hi`, agents at 1/4 and 3/4.
pub fn uniform_grid_law(n: usize, lo: usize, hi: usize) -> PopulationLaw {
    let k = (hi - lo + 1) as i64;
    let fr: ScalarMeasure =
        Measure::new((lo..=hi).map(|i| (frac(i as i64, n as i64), frac(1, k)))).unwrap();
    PopulationLaw::from_fraction_law(n, &b("1/4"), &b("3/4"), &fr).unwrap()
}

/// `parts` positive integers summing to `total`, uniformly among
/// compositions.
pub fn positive_composition(rng: &mut impl Rng, total: usize, parts: usize) -> Vec<usize> {
    assert!(parts >= 1 && parts <= total);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, total - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Random weights with common denominator at most `max_den`.
pub fn random_weights(rng: &mut impl Rng, parts: usize, max_den: usize) -> Vec<Rational> {
    let den = rng.random_range(parts..=max_den);
    positive_composition(rng, den, parts)
        .into_iter()
        .map(|c| frac(c as i64, den as i64))
        .collect()
}

pub fn random_binary_belief(rng: &mut impl Rng, max_den: i64) -> Belief<Rational> {
    let den = rng.random_range(1..=max_den);
    Belief::binary(frac(rng.random_range(0..=den), den)).unwrap()
}

pub fn random_belief(rng: &mut impl Rng, states: usize, max_den: usize) -> Belief<Rational> {
    if states == 2 {
        return random_binary_belief(rng, max_den as i64);
    }
    let den = rng.random_range(states..=max_den.max(states));
    let mut counts = vec![0usize; states];
    for _ in 0..den {
        counts[rng.random_range(0..states)] += 1;
    }
    Belief::new(counts.into_iter().map(|c| frac(c as i64, den as i64)).collect()).unwrap()
}

/// Random law: at most `max_beliefs` distinct posteriors, `max_atoms`
/// empirical distributions, weights with denominators at most `max_den`.
/// The prior is the law's barycenter, rejected unless it has full support.
pub fn random_law(
    rng: &mut impl Rng,
    max_n: usize,
    states: usize,
    max_beliefs: usize,
    max_atoms: usize,
    max_den: usize,
) -> Option<(PopulationLaw, Prior)> {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=max_beliefs);
    let beliefs: Vec<Belief<Rational>> = (0..k).map(|_| random_belief(rng, states, 6)).collect();
    let atoms = rng.random_range(1..=max_atoms);
    let hs: Vec<EmpiricalDistribution> = (0..atoms)
        .map(|_| {
            EmpiricalDistribution::from_profile((0..n).map(|_| beliefs[rng.random_range(0..k)].clone()))
                .unwrap()
        })
        .collect();
    let weights = random_weights(rng, atoms, max_den);
    let law = PopulationLaw::from_measure(Measure::from_weights(hs.into_iter().zip(weights)).ok()?).ok()?;
    let prior = Prior::new(barycenter(&law_expected_measure(&law))).ok()?;
    Some((law, prior))
}

/// Random structure: each agent has up to `signals` signals; each state's
/// kernel charges up to four random profiles.
pub fn random_structure(
    rng: &mut impl Rng,
    n: usize,
    signals: usize,
    mu: &Prior,
    max_den: usize,
) -> popbelief::InformationStructure {
    let sets: Vec<Vec<String>> = (0..n)
        .map(|_| (0..rng.random_range(1..=signals)).map(|s| format!("s{s}")).collect())
        .collect();
    let kernel = (0..mu.states())
        .map(|_| {
            let k = rng.random_range(1..=4usize);
            let weights = random_weights(rng, k, max_den.max(k));
            weights
                .into_iter()
                .map(|w| {
                    let profile = sets.iter().map(|s| s[rng.random_range(0..s.len())].clone()).collect();
                    (profile, w)
                })
                .collect()
        })
        .collect();
    popbelief::InformationStructure::new(mu.clone(), sets, kernel).unwrap()
}
