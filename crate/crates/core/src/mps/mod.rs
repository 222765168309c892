//! Mean-preserving-spread decisions.
//!
//! Two routes are provided. The one-dimensional test compares a law over
//! fractions with a two-atom base through its lower quantile. The general
//! route solves the decomposition LP exactly: find laws `q_w` over the
//! atoms of `P` with `P = sum_w weight_w q_w` and expected measure of each
//! `q_w` equal to its target. Either route returns a checkable witness or
//! a checkable refutation.

pub mod simplex;


use crate::error::{invariant, Result};
use crate::measures::{
    law_expected_measure, quantile_distribution, upper_quantile_distribution, Belief,
    DiscreteMeasure, Measure, PopulationLaw, ScalarMeasure,
};
use crate::scalar::Scalar;
use simplex::{solve_feasibility, EqualitySystem, Feasibility};

/// Two-atom law `alpha * delta_a + (1 - alpha) * delta_b` with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryBase<T> {
    a: T,
    b: T,
    alpha: T,
}

impl<T: Scalar> BinaryBase<T> {
    pub fn new(a: T, b: T, alpha: T) -> Result<Self> {
        if a.is_negative() || b > T::one() || a >= b {
            return Err(invariant(format!("binary base needs 0 <= a < b <= 1, got a={a}, b={b}")));
        }
        if !alpha.is_positive() || alpha >= T::one() {
            return Err(invariant(format!("binary base weight {alpha} outside (0,1)")));
        }
        Ok(Self { a, b, alpha })
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn mean(&self) -> T {
        self.alpha.clone() * self.a.clone() + (T::one() - self.alpha.clone()) * self.b.clone()
    }

    pub fn to_measure(&self) -> ScalarMeasure<T> {
        Measure::new([
            (self.a.clone(), self.alpha.clone()),
            (self.b.clone(), T::one() - self.alpha.clone()),
        ])
        .expect("valid two-atom law")
    }
}

/// The law `sum_w weight_w * delta_{target_w}` over measures on beliefs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadTarget<T> {
    components: Vec<(T, DiscreteMeasure<T>)>,
}

impl<T: Scalar> SpreadTarget<T> {
    pub fn new(components: Vec<(T, DiscreteMeasure<T>)>) -> Result<Self> {
        if components.is_empty() {
            return Err(invariant("spread target has no components"));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !w.is_positive()) {
            return Err(invariant(format!("spread target weight {w} is not positive")));
        }
        let total = components.iter().fold(T::zero(), |acc, (w, _)| acc + w.clone());
        if !total.is_one() {
            return Err(invariant(format!("spread target weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(T, DiscreteMeasure<T>)] {
        &self.components
    }
}

/// Witness that a law is a spread of a [`SpreadTarget`]: one law per
/// target component, each supported on atoms of the decomposed law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadDecomposition<T> {
    pub components: Vec<(T, PopulationLaw<T>)>,
}

/// Witness for the one-dimensional test: `P = alpha * lower + (1 - alpha) * upper`
/// with `E[lower] = a` and `E[upper] = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinarySplit<T> {
    pub lower: ScalarMeasure<T>,
    pub upper: ScalarMeasure<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfeasibilityCertificate<T> {
    /// The two laws have different means (vectors of state probabilities,
    /// or a single entry for one-dimensional laws).
    MeanMismatch { law_mean: Vec<T>, target_mean: Vec<T> },
    /// The lower `alpha`-quantile of the law has mean above the low base atom.
    QuantileViolation { alpha: T, quantile_mean: T, threshold: T },
    /// Dual vector `y` of the decomposition LP with `y^T A >= 0`, `y^T b < 0`.
    Farkas { dual: Vec<T> },
}

impl<T> InfeasibilityCertificate<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::MeanMismatch { .. } => "MeanMismatch",
            Self::QuantileViolation { .. } => "QuantileViolation",
            Self::Farkas { .. } => "FarkasCertificate",
        }
    }
}

/// Outcome of a spread test: a witness or a refutation, never both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpreadVerdict<W, T> {
    Spread(W),
    NotSpread(InfeasibilityCertificate<T>),
}

impl<W, T> SpreadVerdict<W, T> {
    pub fn is_spread(&self) -> bool {
        matches!(self, Self::Spread(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Self::Spread(w) => Some(w),
            Self::NotSpread(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&InfeasibilityCertificate<T>> {
        match self {
            Self::Spread(_) => None,
            Self::NotSpread(c) => Some(c),
        }
    }
}

/// Is `p` a mean-preserving spread of `base`? Holds iff the means agree
/// and the lower `alpha`-quantile of `p` has mean at most `a`.
pub fn is_mps_binary_base<T: Scalar>(
    p: &ScalarMeasure<T>,
    base: &BinaryBase<T>,
) -> SpreadVerdict<BinarySplit<T>, T> {
    let mean = p.mean();
    if mean != base.mean() {
        return SpreadVerdict::NotSpread(InfeasibilityCertificate::MeanMismatch {
            law_mean: vec![mean],
            target_mean: vec![base.mean()],
        });
    }
    let alpha = base.alpha();
    let lower = quantile_distribution(p, alpha).expect("alpha in (0,1)");
    let lower_mean = lower.mean();
    if lower_mean > *base.a() {
        return SpreadVerdict::NotSpread(InfeasibilityCertificate::QuantileViolation {
            alpha: alpha.clone(),
            quantile_mean: lower_mean,
            threshold: base.a().clone(),
        });
    }
    // Both quantile tails fit under p / alpha; mixing them hits mean a
    // exactly and leaves a non-negative remainder with mean b.
    let upper = upper_quantile_distribution(p, alpha).expect("alpha in (0,1)");
    let upper_mean = upper.mean();
    let lambda = if upper_mean == lower_mean {
        T::one()
    } else {
        (upper_mean.clone() - base.a().clone()) / (upper_mean - lower_mean)
    };
    let low_part = Measure::mixture([(lambda.clone(), &lower), (T::one() - lambda, &upper)])
        .expect("convex combination");
    let rest = T::one() - alpha.clone();
    let high_atoms = p
        .atoms()
        .iter()
        .map(|(x, w)| (x.clone(), (w.clone() - alpha.clone() * low_part.weight_of(x)) / rest.clone()));
    let high_part = Measure::from_weights(high_atoms).expect("remainder is a probability law");
    SpreadVerdict::Spread(BinarySplit {
        lower: low_part,
        upper: high_part,
    })
}

pub fn verify_binary_split<T: Scalar>(
    p: &ScalarMeasure<T>,
    base: &BinaryBase<T>,
    split: &BinarySplit<T>,
) -> bool {
    let alpha = base.alpha().clone();
    split.lower.mean() == *base.a()
        && split.upper.mean() == *base.b()
        && Measure::mixture([(alpha.clone(), &split.lower), (T::one() - alpha, &split.upper)])
            .is_ok_and(|m| m == *p)
}

/// Re-checks a refutation produced by [`is_mps_binary_base`].
pub fn verify_binary_certificate<T: Scalar>(
    p: &ScalarMeasure<T>,
    base: &BinaryBase<T>,
    cert: &InfeasibilityCertificate<T>,
) -> bool {
    match cert {
        InfeasibilityCertificate::MeanMismatch { law_mean, target_mean } => {
            let mean = p.mean();
            law_mean.as_slice() == [mean.clone()]
                && target_mean.as_slice() == [base.mean()]
                && mean != base.mean()
        }
        InfeasibilityCertificate::QuantileViolation {
            alpha,
            quantile_mean,
            threshold,
        } => {
            alpha == base.alpha()
                && threshold == base.a()
                && p.mean() == base.mean()
                && quantile_distribution(p, alpha).is_ok_and(|q| q.mean() == *quantile_mean)
                && quantile_mean > threshold
        }
        InfeasibilityCertificate::Farkas { .. } => false,
    }
}

/// Variables `q[w][j]` (component `w`, atom `j` of `p`), flattened as
/// `w * atoms + j`. Rows: first one per atom of `p` (mixture reproduces
/// `p`), then one per (component, belief) pair (expected measure matches
/// the target), beliefs ranging over the union of all supports.
pub fn decomposition_system<T: Scalar>(
    p: &PopulationLaw<T>,
    target: &SpreadTarget<T>,
) -> EqualitySystem<T> {
    let atoms = p.atoms();
    let j_count = atoms.len();
    let comps = target.components();
    let mut sys = EqualitySystem::new(comps.len() * j_count);
    for (j, (_, pj)) in atoms.iter().enumerate() {
        let mut row = vec![T::zero(); sys.vars];
        for (w, (weight, _)) in comps.iter().enumerate() {
            row[w * j_count + j] = weight.clone();
        }
        sys.push_row(row, pj.clone());
    }
    let beliefs = spread_beliefs(p, target);
    let n = T::from_usize(p.n());
    for (w, (_, tm)) in comps.iter().enumerate() {
        for x in &beliefs {
            let mut row = vec![T::zero(); sys.vars];
            for (j, (h, _)) in atoms.iter().enumerate() {
                let c = h.count_of(x);
                if c > 0 {
                    row[w * j_count + j] = T::from_usize(c) / n.clone();
                }
            }
            sys.push_row(row, tm.weight_of(x));
        }
    }
    sys
}

fn spread_beliefs<T: Scalar>(p: &PopulationLaw<T>, target: &SpreadTarget<T>) -> Vec<Belief<T>> {
    let mut beliefs = p.belief_support();
    for (_, tm) in target.components() {
        beliefs.extend(tm.support().cloned());
    }
    beliefs.sort();
    beliefs.dedup();
    beliefs
}

/// Decides whether `p` is a mean-preserving spread of `target`, using the
/// one-dimensional test when every belief involved is one of two points
/// and the targets take at most two distinct values; otherwise the LP.
pub fn mps_decompose<T: Scalar>(
    p: &PopulationLaw<T>,
    target: &SpreadTarget<T>,
) -> SpreadVerdict<SpreadDecomposition<T>, T> {
    match OneDimensional::reduce(p, target) {
        Some(reduced) => reduced.decide(p, target),
        None => mps_decompose_lp(p, target),
    }
}

/// The LP route, regardless of the shape of the input.
pub fn mps_decompose_lp<T: Scalar>(
    p: &PopulationLaw<T>,
    target: &SpreadTarget<T>,
) -> SpreadVerdict<SpreadDecomposition<T>, T> {
    let sys = decomposition_system(p, target);
    match solve_feasibility(&sys) {
        Feasibility::Feasible(x) => {
            let j_count = p.atoms().len();
            let components = target
                .components()
                .iter()
                .enumerate()
                .map(|(w, (weight, _))| {
                    let q = Measure::from_weights(
                        p.atoms()
                            .iter()
                            .enumerate()
                            .map(|(j, (h, _))| (h.clone(), x[w * j_count + j].clone())),
                    )
                    .and_then(PopulationLaw::from_measure)
                    .expect("LP solution rows are probability laws");
                    (weight.clone(), q)
                })
                .collect();
            SpreadVerdict::Spread(SpreadDecomposition { components })
        }
        Feasibility::Infeasible(dual) => {
            SpreadVerdict::NotSpread(InfeasibilityCertificate::Farkas { dual })
        }
    }
}

/// Checks both constraint families exactly.
pub fn verify_decomposition<T: Scalar>(
    p: &PopulationLaw<T>,
    target: &SpreadTarget<T>,
    d: &SpreadDecomposition<T>,
) -> bool {
    let comps = target.components();
    if d.components.len() != comps.len() {
        return false;
    }
    let weights_match = d
        .components
        .iter()
        .zip(comps)
        .all(|((w, _), (tw, _))| w == tw);
    if !weights_match {
        return false;
    }
    let on_support = d.components.iter().all(|(_, q)| {
        q.n() == p.n() && q.atoms().iter().all(|(h, _)| p.weight_of(h).is_positive())
    });
    if !on_support {
        return false;
    }
    let total = d.components.iter().fold(T::zero(), |acc, (w, _)| acc + w.clone());
    if !total.is_one() {
        return false;
    }
    let mixture = Measure::mixture(d.components.iter().map(|(w, q)| (w.clone(), q.measure())));
    if !mixture.is_ok_and(|m| m == *p.measure()) {
        return false;
    }
    d.components
        .iter()
        .zip(comps)
        .all(|((_, q), (_, tm))| law_expected_measure(q) == *tm)
}

/// Re-checks a refutation of `p` being a spread of `target`.
pub fn verify_certificate<T: Scalar>(
    p: &PopulationLaw<T>,
    target: &SpreadTarget<T>,
    cert: &InfeasibilityCertificate<T>,
) -> bool {
    match cert {
        InfeasibilityCertificate::Farkas { dual } => {
            decomposition_system(p, target).is_farkas_certificate(dual)
        }
        _ => match OneDimensional::reduce(p, target) {
            Some(reduced) => match &reduced.base {
                ReducedBase::Two(base) => verify_binary_certificate(&reduced.fractions, base, cert),
                ReducedBase::Single(t) => match cert {
                    InfeasibilityCertificate::MeanMismatch { law_mean, target_mean } => {
                        let mean = reduced.fractions.mean();
                        law_mean.as_slice() == [mean.clone()]
                            && target_mean.as_slice() == [t.clone()]
                            && mean != *t
                    }
                    _ => false,
                },
            },
            None => false,
        },
    }
}

enum ReducedBase<T> {
    Single(T),
    Two(BinaryBase<T>),
}

/// A spread problem where every belief is `low` or `high`: `p` becomes a
/// law over the fraction of agents at `high`, and each target becomes the
/// mass it puts on `high`.
struct OneDimensional<T> {
    low: Belief<T>,
    high: Belief<T>,
    fractions: ScalarMeasure<T>,
    /// Per target component, the mass on `high`.
    levels: Vec<T>,
    base: ReducedBase<T>,
}

impl<T: Scalar> OneDimensional<T> {
    fn reduce(p: &PopulationLaw<T>, target: &SpreadTarget<T>) -> Option<Self> {
        let beliefs = spread_beliefs(p, target);
        let [low, high] = <[Belief<T>; 2]>::try_from(beliefs).ok()?;
        let levels: Vec<T> = target
            .components()
            .iter()
            .map(|(_, tm)| tm.weight_of(&high))
            .collect();
        let mut grouped: Vec<(T, T)> = Vec::new();
        for ((w, _), level) in target.components().iter().zip(&levels) {
            match grouped.iter_mut().find(|(l, _)| l == level) {
                Some((_, acc)) => *acc = acc.clone() + w.clone(),
                None => grouped.push((level.clone(), w.clone())),
            }
        }
        grouped.sort();
        let base = match grouped.as_slice() {
            [(t, _)] => ReducedBase::Single(t.clone()),
            [(a, alpha), (b, _)] => {
                ReducedBase::Two(BinaryBase::new(a.clone(), b.clone(), alpha.clone()).ok()?)
            }
            _ => return None,
        };
        let fractions = p.fraction_law(&high);
        Some(Self {
            low,
            high,
            fractions,
            levels,
            base,
        })
    }

    fn decide(
        &self,
        p: &PopulationLaw<T>,
        target: &SpreadTarget<T>,
    ) -> SpreadVerdict<SpreadDecomposition<T>, T> {
        let lift = |m: &ScalarMeasure<T>| {
            PopulationLaw::from_fraction_law(p.n(), &self.low, &self.high, m)
                .expect("fractions stay on the population grid")
        };
        let (lower, upper, cut) = match &self.base {
            ReducedBase::Single(t) => {
                let mean = self.fractions.mean();
                if mean != *t {
                    return SpreadVerdict::NotSpread(InfeasibilityCertificate::MeanMismatch {
                        law_mean: vec![mean],
                        target_mean: vec![t.clone()],
                    });
                }
                (p.clone(), p.clone(), t.clone())
            }
            ReducedBase::Two(base) => match is_mps_binary_base(&self.fractions, base) {
                SpreadVerdict::Spread(split) => (lift(&split.lower), lift(&split.upper), base.a().clone()),
                SpreadVerdict::NotSpread(c) => return SpreadVerdict::NotSpread(c),
            },
        };
        let components = target
            .components()
            .iter()
            .zip(&self.levels)
            .map(|((w, _), level)| {
                let q = if *level == cut { lower.clone() } else { upper.clone() };
                (w.clone(), q)
            })
            .collect();
        SpreadVerdict::Spread(SpreadDecomposition { components })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::EmpiricalDistribution;
    use crate::Rational;

    fn r(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn b(p: &str) -> Belief<Rational> {
        Belief::binary(r(p)).unwrap()
    }

    fn grid_uniform(n: i64, lo: i64, hi: i64) -> ScalarMeasure<Rational> {
        let k = hi - lo + 1;
        Measure::new((lo..=hi).map(|i| (Rational::from_frac(i, n), Rational::from_frac(1, k)))).unwrap()
    }

    fn quarter_base() -> BinaryBase<Rational> {
        BinaryBase::new(r("1/4"), r("3/4"), r("1/2")).unwrap()
    }

    #[test]
    fn binary_base_validation() {
        assert!(BinaryBase::new(r("1/2"), r("1/2"), r("1/2")).is_err());
        assert!(BinaryBase::new(r("1/4"), r("3/4"), r("1")).is_err());
        assert!(BinaryBase::new(r("-1/4"), r("3/4"), r("1/2")).is_err());
    }

    #[test]
    fn uniform_on_full_grid_is_a_spread() {
        let p = grid_uniform(9, 0, 9);
        let v = is_mps_binary_base(&p, &quarter_base());
        let split = v.witness().expect("feasible");
        assert!(verify_binary_split(&p, &quarter_base(), split));
    }

    #[test]
    fn uniform_on_interior_grid_violates_quantile() {
        let p = grid_uniform(9, 1, 8);
        let v = is_mps_binary_base(&p, &quarter_base());
        let cert = v.certificate().expect("infeasible");
        assert_eq!(
            *cert,
            InfeasibilityCertificate::QuantileViolation {
                alpha: r("1/2"),
                quantile_mean: r("5/18"),
                threshold: r("1/4"),
            }
        );
        assert!(verify_binary_certificate(&p, &quarter_base(), cert));
    }

    #[test]
    fn base_is_a_spread_of_itself() {
        let base = quarter_base();
        assert!(is_mps_binary_base(&base.to_measure(), &base).is_spread());
    }

    #[test]
    fn mean_mismatch_certificates() {
        let p = grid_uniform(4, 0, 2);
        let v = is_mps_binary_base(&p, &quarter_base());
        let cert = v.certificate().unwrap();
        assert_eq!(cert.kind(), "MeanMismatch");
        assert!(verify_binary_certificate(&p, &quarter_base(), cert));
        let bogus = InfeasibilityCertificate::MeanMismatch {
            law_mean: vec![r("1/2")],
            target_mean: vec![r("1/2")],
        };
        assert!(!verify_binary_certificate(&grid_uniform(9, 0, 9), &quarter_base(), &bogus));
    }

    fn two_profile_law() -> (PopulationLaw<Rational>, EmpiricalDistribution<Rational>, EmpiricalDistribution<Rational>) {
        let h1 = EmpiricalDistribution::new(3, [(b("1/3"), 2), (b("2/3"), 1)]).unwrap();
        let h2 = EmpiricalDistribution::new(3, [(b("2/3"), 2), (b("1/3"), 1)]).unwrap();
        let p = PopulationLaw::new([(h1.clone(), r("1/2")), (h2.clone(), r("1/2"))]).unwrap();
        (p, h1, h2)
    }

    fn two_profile_target() -> SpreadTarget<Rational> {
        let t0 = Measure::new([(b("1/3"), r("2/3")), (b("2/3"), r("1/3"))]).unwrap();
        let t1 = Measure::new([(b("2/3"), r("2/3")), (b("1/3"), r("1/3"))]).unwrap();
        SpreadTarget::new(vec![(r("1/2"), t0), (r("1/2"), t1)]).unwrap()
    }

    #[test]
    fn two_profile_law_decomposes_both_routes() {
        let (p, h1, h2) = two_profile_law();
        let target = two_profile_target();
        let expected = SpreadDecomposition {
            components: vec![
                (r("1/2"), PopulationLaw::dirac(h1)),
                (r("1/2"), PopulationLaw::dirac(h2)),
            ],
        };
        assert!(verify_decomposition(&p, &target, &expected));
        for verdict in [mps_decompose(&p, &target), mps_decompose_lp(&p, &target)] {
            assert_eq!(verdict.witness(), Some(&expected));
        }
    }

    #[test]
    fn no_information_decomposes_trivially() {
        let h = EmpiricalDistribution::new(2, [(b("1/3"), 2)]).unwrap();
        let p = PopulationLaw::dirac(h.clone());
        let tm = h.to_measure();
        let target = SpreadTarget::new(vec![(r("2/3"), tm.clone()), (r("1/3"), tm)]).unwrap();
        for verdict in [mps_decompose(&p, &target), mps_decompose_lp(&p, &target)] {
            let d = verdict.witness().unwrap();
            assert!(d.components.iter().all(|(_, q)| *q == p));
        }
    }

    #[test]
    fn interior_uniform_has_farkas_certificate() {
        let p = PopulationLaw::from_fraction_law(9, &b("1/4"), &b("3/4"), &grid_uniform(9, 1, 8)).unwrap();
        let t0 = Measure::new([(b("1/4"), r("3/4")), (b("3/4"), r("1/4"))]).unwrap();
        let t1 = Measure::new([(b("1/4"), r("1/4")), (b("3/4"), r("3/4"))]).unwrap();
        let target = SpreadTarget::new(vec![(r("1/2"), t0), (r("1/2"), t1)]).unwrap();
        let lp = mps_decompose_lp(&p, &target);
        let cert = lp.certificate().expect("infeasible");
        assert_eq!(cert.kind(), "FarkasCertificate");
        assert!(verify_certificate(&p, &target, cert));

        let fast = mps_decompose(&p, &target);
        let cert = fast.certificate().expect("infeasible");
        assert_eq!(cert.kind(), "QuantileViolation");
        assert!(verify_certificate(&p, &target, cert));

        let zeros = InfeasibilityCertificate::Farkas {
            dual: vec![r("0"); decomposition_system(&p, &target).rows.len()],
        };
        assert!(!verify_certificate(&p, &target, &zeros));
    }

    #[test]
    fn perturbed_decomposition_fails_verification() {
        let (p, _, _) = two_profile_law();
        let target = two_profile_target();
        let verdict = mps_decompose_lp(&p, &target);
        let mut d = verdict.witness().unwrap().clone();
        assert!(verify_decomposition(&p, &target, &d));
        d.components[0].0 = d.components[0].0.clone() + r("1/1000");
        assert!(!verify_decomposition(&p, &target, &d));
    }

    #[test]
    fn boundary_instance_flips_under_perturbation() {
        // Bin(2, 1/2) on {0, 1/2, 1}: its lower half has mean exactly 1/4.
        let p = Measure::new([(r("0"), r("1/4")), (r("1/2"), r("1/2")), (r("1"), r("1/4"))]).unwrap();
        let base = BinaryBase::new(r("1/4"), r("3/4"), r("1/2")).unwrap();
        assert_eq!(quantile_distribution(&p, &r("1/2")).unwrap().mean(), r("1/4"));
        assert!(is_mps_binary_base(&p, &base).is_spread());
        // Move eps mass from both extremes to the middle: quantile mean rises.
        for eps in ["1/1000", "1/1000000"] {
            let e = r(eps);
            let q = Measure::new([
                (r("0"), r("1/4") - e.clone()),
                (r("1/2"), r("1/2") + e.clone() * r("2")),
                (r("1"), r("1/4") - e),
            ])
            .unwrap();
            assert!(!is_mps_binary_base(&q, &base).is_spread());
        }
    }
}
