//! Beliefs, finitely supported measures, empirical distributions of a
//! population, and laws over those empirical distributions.
//!
//! All types are immutable values kept in a canonical form (atoms sorted,
//! duplicates merged) so that structural equality is measure equality.

use std::fmt;


use crate::error::{domain, invariant, Result};
use crate::scalar::Scalar;

/// A point of the probability simplex over `m >= 2` states.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Belief<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Belief<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(invariant(format!(
                "belief needs at least 2 states, got {}",
                coords.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_probability()) {
            return Err(invariant(format!("belief coordinate {c} outside [0,1]")));
        }
        let total = coords.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !total.is_one() {
            return Err(invariant(format!("belief coordinates sum to {total}, not 1")));
        }
        Ok(Self { coords })
    }

    /// Binary-state belief assigning probability `p` to state 1.
    pub fn binary(p: T) -> Result<Self> {
        Self::new(vec![T::one() - p.clone(), p])
    }

    /// The belief that puts all mass on `state`.
    pub fn vertex(states: usize, state: usize) -> Result<Self> {
        if state >= states {
            return Err(domain(format!("state {state} out of range for {states} states")));
        }
        let coords = (0..states)
            .map(|i| if i == state { T::one() } else { T::zero() })
            .collect();
        Self::new(coords)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn coord(&self, state: usize) -> &T {
        &self.coords[state]
    }

    pub fn states(&self) -> usize {
        self.coords.len()
    }

    /// Compact signal label, e.g. `"3/4,1/4"`; inverse of [`Belief::from_label`].
    pub fn label(&self) -> String {
        self.coords
            .iter()
            .map(Scalar::to_canonical_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let coords = label
            .split(',')
            .map(|c| {
                T::parse_exact(c).ok_or_else(|| invariant(format!("bad belief label {label:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }
}

impl<T: Scalar> fmt::Display for Belief<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Common prior; every state must carry positive mass.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Prior<T> {
    mu: Belief<T>,
}

impl<T: Scalar> Prior<T> {
    pub fn new(mu: Belief<T>) -> Result<Self> {
        if let Some(state) = mu.coords().iter().position(|c| !c.is_positive()) {
            return Err(invariant(format!(
                "prior must have full support, state {state} has mass {}",
                mu.coord(state)
            )));
        }
        Ok(Self { mu })
    }

    /// Binary prior with `mu` the probability of state 1.
    pub fn binary(mu: T) -> Result<Self> {
        Self::new(Belief::binary(mu)?)
    }

    pub fn belief(&self) -> &Belief<T> {
        &self.mu
    }

    pub fn mass(&self, state: usize) -> &T {
        self.mu.coord(state)
    }

    pub fn states(&self) -> usize {
        self.mu.states()
    }
}

/// Finitely supported probability measure with canonical (sorted, merged)
/// atoms and strictly positive weights.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Measure<P, T> {
    atoms: Vec<(P, T)>,
}

/// Measure over beliefs.
pub type DiscreteMeasure<T> = Measure<Belief<T>, T>;

/// Measure over scalar values (one-dimensional laws).
pub type ScalarMeasure<T> = Measure<T, T>;

impl<P: Ord + Clone + fmt::Debug, T: Scalar> Measure<P, T> {
    /// Strict constructor: every listed weight must be positive. Repeated
    /// support points are merged.
    pub fn new(atoms: impl IntoIterator<Item = (P, T)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        if let Some((p, w)) = atoms.iter().find(|(_, w)| !w.is_positive()) {
            return Err(invariant(format!("atom {p:?} has non-positive weight {w}")));
        }
        Self::from_weights(atoms)
    }

    /// Lenient constructor: zero weights are dropped, negative weights are
    /// rejected, repeated support points are merged.
    pub fn from_weights(atoms: impl IntoIterator<Item = (P, T)>) -> Result<Self> {
        let mut atoms: Vec<(P, T)> = atoms.into_iter().collect();
        if let Some((p, w)) = atoms.iter().find(|(_, w)| w.is_negative()) {
            return Err(invariant(format!("atom {p:?} has negative weight {w}")));
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(P, T)> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            match merged.last_mut() {
                Some((last, acc)) if *last == p => *acc = acc.clone() + w,
                _ => merged.push((p, w)),
            }
        }
        merged.retain(|(_, w)| !w.is_zero());
        let total = merged.iter().fold(T::zero(), |acc, (_, w)| acc + w.clone());
        if !total.is_one() {
            return Err(invariant(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn dirac(point: P) -> Self {
        Self {
            atoms: vec![(point, T::one())],
        }
    }

    /// Mixture `sum_i w_i * m_i`; the `w_i` must form a probability vector.
    pub fn mixture<'a>(components: impl IntoIterator<Item = (T, &'a Self)>) -> Result<Self>
    where
        P: 'a,
    {
        let mut atoms = Vec::new();
        let mut total = T::zero();
        for (w, m) in components {
            total = total + w.clone();
            atoms.extend(m.atoms.iter().map(|(p, v)| (p.clone(), w.clone() * v.clone())));
        }
        if !total.is_one() {
            return Err(invariant(format!("mixture weights sum to {total}, not 1")));
        }
        Self::from_weights(atoms)
    }

    pub fn atoms(&self) -> &[(P, T)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = &P> {
        self.atoms.iter().map(|(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass of a single point (zero off the support).
    pub fn weight_of(&self, point: &P) -> T {
        self.atoms
            .binary_search_by(|(p, _)| p.cmp(point))
            .map(|i| self.atoms[i].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    /// Push-forward along `f`, merging points that collide.
    pub fn map_support<Q: Ord + Clone + fmt::Debug>(&self, mut f: impl FnMut(&P) -> Q) -> Measure<Q, T> {
        Measure::from_weights(self.atoms.iter().map(|(p, w)| (f(p), w.clone())))
            .expect("push-forward of a probability measure")
    }
}

/// Total-variation distance `(1/2) sum |m1 - m2|`.
pub fn total_variation<P: Ord + Clone + fmt::Debug, T: Scalar>(
    m1: &Measure<P, T>,
    m2: &Measure<P, T>,
) -> T {
    let mut total = T::zero();
    for (p, w) in m1.atoms() {
        total = total + (w.clone() - m2.weight_of(p)).abs();
    }
    for (p, w) in m2.atoms() {
        if m1.weight_of(p).is_zero() {
            total = total + w.clone();
        }
    }
    total / T::from_int(2)
}

impl<T: Scalar> ScalarMeasure<T> {
    pub fn mean(&self) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, (x, w)| acc + x.clone() * w.clone())
    }
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Number of states of the beliefs in the support.
    pub fn states(&self) -> usize {
        self.atoms[0].0.states()
    }
}

/// Mean of a measure over beliefs, coordinate-wise.
pub fn barycenter<T: Scalar>(m: &DiscreteMeasure<T>) -> Belief<T> {
    let mut coords = vec![T::zero(); m.states()];
    for (x, w) in m.atoms() {
        for (acc, c) in coords.iter_mut().zip(x.coords()) {
            *acc = acc.clone() + w.clone() * c.clone();
        }
    }
    Belief::new(coords).expect("convex combination of beliefs is a belief")
}

/// One coordinate of each belief, as a law over scalars.
pub fn project<T: Scalar>(m: &DiscreteMeasure<T>, state: usize) -> ScalarMeasure<T> {
    m.map_support(|x| x.coord(state).clone())
}

/// Lower `alpha`-quantile distribution: the law conditioned on its lowest
/// `alpha` mass. Atoms whose retained mass would be zero are dropped.
pub fn quantile_distribution<T: Scalar>(m: &ScalarMeasure<T>, alpha: &T) -> Result<ScalarMeasure<T>> {
    tail(m.atoms().iter(), alpha)
}

/// Upper `alpha`-quantile distribution: the law conditioned on its highest
/// `alpha` mass.
pub fn upper_quantile_distribution<T: Scalar>(
    m: &ScalarMeasure<T>,
    alpha: &T,
) -> Result<ScalarMeasure<T>> {
    tail(m.atoms().iter().rev(), alpha)
}

fn tail<'a, T: Scalar>(
    atoms: impl Iterator<Item = &'a (T, T)>,
    alpha: &T,
) -> Result<ScalarMeasure<T>> {
    if !alpha.is_positive() || *alpha > T::one() {
        return Err(domain(format!("quantile level {alpha} outside (0,1]")));
    }
    let mut remaining = alpha.clone();
    let mut kept = Vec::new();
    for (x, p) in atoms {
        if remaining.is_zero() {
            break;
        }
        let take = p.clone().min(remaining.clone());
        remaining = remaining - take.clone();
        kept.push((x.clone(), take / alpha.clone()));
    }
    Measure::from_weights(kept)
}

/// A size-`n` multiset of beliefs: the anonymous posterior profile of a
/// population.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EmpiricalDistribution<T> {
    n: usize,
    counts: Vec<(Belief<T>, usize)>,
}

impl<T: Scalar> EmpiricalDistribution<T> {
    pub fn new(n: usize, counts: impl IntoIterator<Item = (Belief<T>, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(invariant("population size must be positive"));
        }
        let mut counts: Vec<_> = counts.into_iter().collect();
        if counts.iter().any(|(_, c)| *c == 0) {
            return Err(invariant("empirical counts must be positive"));
        }
        counts.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Belief<T>, usize)> = Vec::with_capacity(counts.len());
        for (x, c) in counts {
            match merged.last_mut() {
                Some((last, acc)) if *last == x => *acc += c,
                _ => merged.push((x, c)),
            }
        }
        let total: usize = merged.iter().map(|(_, c)| c).sum();
        if total != n {
            return Err(invariant(format!("empirical counts sum to {total}, expected n = {n}")));
        }
        let states = merged[0].0.states();
        if merged.iter().any(|(x, _)| x.states() != states) {
            return Err(invariant("empirical beliefs have mixed state counts"));
        }
        Ok(Self { n, counts: merged })
    }

    /// The empirical distribution of an explicit list of agent beliefs.
    pub fn from_profile(beliefs: impl IntoIterator<Item = Belief<T>>) -> Result<Self> {
        let beliefs: Vec<_> = beliefs.into_iter().collect();
        Self::new(beliefs.len(), beliefs.into_iter().map(|b| (b, 1)))
    }

    /// Two-posterior empirical distribution: `high_count` agents hold
    /// `high`, the rest hold `low`.
    pub fn binary_split(n: usize, low: &Belief<T>, high: &Belief<T>, high_count: usize) -> Result<Self> {
        if high_count > n {
            return Err(domain(format!("{high_count} agents out of {n}")));
        }
        let parts = [(low.clone(), n - high_count), (high.clone(), high_count)];
        Self::new(n, parts.into_iter().filter(|(_, c)| *c > 0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[(Belief<T>, usize)] {
        &self.counts
    }

    pub fn count_of(&self, x: &Belief<T>) -> usize {
        self.counts
            .binary_search_by(|(b, _)| b.cmp(x))
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn states(&self) -> usize {
        self.counts[0].0.states()
    }

    /// Beliefs listed once per agent, in canonical order.
    pub fn profile(&self) -> Vec<Belief<T>> {
        self.counts
            .iter()
            .flat_map(|(x, c)| std::iter::repeat_n(x.clone(), *c))
            .collect()
    }

    pub fn to_measure(&self) -> DiscreteMeasure<T> {
        empirical_to_measure(self)
    }
}

impl<T: Scalar> fmt::Display for EmpiricalDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, c)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}x{c}")?;
        }
        write!(f, "}}")
    }
}

/// Weights `count / n`.
pub fn empirical_to_measure<T: Scalar>(h: &EmpiricalDistribution<T>) -> DiscreteMeasure<T> {
    let n = T::from_usize(h.n);
    Measure::new(
        h.counts
            .iter()
            .map(|(x, c)| (x.clone(), T::from_usize(*c) / n.clone())),
    )
    .expect("counts sum to n")
}

/// A finitely supported law over empirical distributions of a common
/// population size.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PopulationLaw<T> {
    n: usize,
    law: Measure<EmpiricalDistribution<T>, T>,
}

impl<T: Scalar> PopulationLaw<T> {
    pub fn new(atoms: impl IntoIterator<Item = (EmpiricalDistribution<T>, T)>) -> Result<Self> {
        Self::from_measure(Measure::new(atoms)?)
    }

    pub fn from_measure(law: Measure<EmpiricalDistribution<T>, T>) -> Result<Self> {
        let Some((first, _)) = law.atoms().first() else {
            return Err(invariant("population law has no atoms"));
        };
        let (n, states) = (first.n(), first.states());
        for (h, _) in law.atoms() {
            if h.n() != n {
                return Err(invariant(format!(
                    "population law mixes sizes {n} and {}",
                    h.n()
                )));
            }
            if h.states() != states {
                return Err(invariant("population law mixes state counts"));
            }
        }
        Ok(Self { n, law })
    }

    pub fn dirac(h: EmpiricalDistribution<T>) -> Self {
        Self {
            n: h.n(),
            law: Measure::dirac(h),
        }
    }

    /// Two-posterior law from a law over fractions `k/n` of agents holding
    /// `high` (the rest hold `low`).
    pub fn from_fraction_law(
        n: usize,
        low: &Belief<T>,
        high: &Belief<T>,
        fractions: &ScalarMeasure<T>,
    ) -> Result<Self> {
        let nn = T::from_usize(n);
        let atoms = fractions
            .atoms()
            .iter()
            .map(|(f, w)| {
                let k = (f.clone() * nn.clone())
                    .to_index()
                    .filter(|k| *k <= n)
                    .ok_or_else(|| domain(format!("fraction {f} is not on the 1/{n} grid")))?;
                Ok((EmpiricalDistribution::binary_split(n, low, high, k)?, w.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[(EmpiricalDistribution<T>, T)] {
        self.law.atoms()
    }

    pub fn measure(&self) -> &Measure<EmpiricalDistribution<T>, T> {
        &self.law
    }

    pub fn states(&self) -> usize {
        self.atoms()[0].0.states()
    }

    pub fn weight_of(&self, h: &EmpiricalDistribution<T>) -> T {
        self.law.weight_of(h)
    }

    /// All beliefs held by some agent in some support point, sorted.
    pub fn belief_support(&self) -> Vec<Belief<T>> {
        let mut out: Vec<Belief<T>> = self
            .atoms()
            .iter()
            .flat_map(|(h, _)| h.counts().iter().map(|(x, _)| x.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Law of the fraction of agents holding belief `x`.
    pub fn fraction_law(&self, x: &Belief<T>) -> ScalarMeasure<T> {
        let n = T::from_usize(self.n);
        self.law
            .map_support(|h| T::from_usize(h.count_of(x)) / n.clone())
    }
}

/// The expected measure `sum_j a_j H_j` of a population law.
pub fn law_expected_measure<T: Scalar>(p: &PopulationLaw<T>) -> DiscreteMeasure<T> {
    let n = T::from_usize(p.n());
    let atoms = p.atoms().iter().flat_map(|(h, a)| {
        let n = n.clone();
        h.counts()
            .iter()
            .map(move |(x, c)| (x.clone(), a.clone() * T::from_usize(*c) / n.clone()))
    });
    Measure::from_weights(atoms).expect("mixture of empirical measures")
}
