//! Agent-symmetric product laws `Q^n`, where each agent's posterior is
//! drawn independently from the same marginal `Q`.

use crate::error::{domain, invariant, Error, Result};
use crate::feasibility::{binary_base, check_feasible, FeasibilityVerdict};
use crate::measures::{
    quantile_distribution, DiscreteMeasure, EmpiricalDistribution, Measure, PopulationLaw, Prior,
    ScalarMeasure,
};
use crate::scalar::{binomial, pow, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricProduct<T> {
    q: DiscreteMeasure<T>,
    n: usize,
}

impl<T: Scalar> SymmetricProduct<T> {
    pub fn new(q: DiscreteMeasure<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invariant("product law needs at least one agent"));
        }
        Ok(Self { q, n })
    }

    pub fn q(&self) -> &DiscreteMeasure<T> {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct empirical distributions, `C(n + k - 1, k - 1)`.
    pub fn support_size(&self) -> u128 {
        let k = self.q.len() as u128;
        let n = self.n as u128;
        let mut c: u128 = 1;
        for i in 1..k {
            match c.checked_mul(n + i) {
                Some(v) => c = v / i,
                None => return u128::MAX,
            }
        }
        c
    }
}

/// `MN(n, Q)`: the law of the empirical distribution of `n` i.i.d. draws.
pub fn multinomial_law<T: Scalar>(sp: &SymmetricProduct<T>, bound: u128) -> Result<PopulationLaw<T>> {
    let needed = sp.support_size();
    if needed > bound {
        return Err(Error::ResourceLimit {
            what: "multinomial support".into(),
            needed,
            bound,
        });
    }
    let atoms = sp.q.atoms();
    let mut out = Vec::new();
    let mut counts = vec![0usize; atoms.len()];
    fill(sp.n, 0, &mut counts, &mut |counts| {
        let mut weight = T::one();
        let mut left = sp.n;
        for ((_, q), &c) in atoms.iter().zip(counts.iter()) {
            weight = weight * binomial::<T>(left, c) * pow(q, c);
            left -= c;
        }
        let h = EmpiricalDistribution::new(
            sp.n,
            atoms
                .iter()
                .zip(counts.iter())
                .filter(|(_, c)| **c > 0)
                .map(|((x, _), &c)| (x.clone(), c)),
        )
        .expect("counts sum to n");
        out.push((h, weight));
    });
    PopulationLaw::from_measure(Measure::from_weights(out)?)
}

fn fill(left: usize, i: usize, counts: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if i + 1 == counts.len() {
        counts[i] = left;
        emit(counts);
        return;
    }
    for c in 0..=left {
        counts[i] = c;
        fill(left - c, i + 1, counts, emit);
    }
}

/// Full feasibility verdict for `Q^n`: `MN(n, Q)` against the base built
/// from the state tilts of `Q`.
pub fn product_feasible<T: Scalar>(
    sp: &SymmetricProduct<T>,
    mu: &Prior<T>,
    bound: u128,
) -> Result<FeasibilityVerdict<T>> {
    Ok(check_feasible(&multinomial_law(sp, bound)?, mu))
}

/// `Bin(n, p)` with values on the grid `{0, 1/n, ..., 1}`.
pub fn binomial_fraction_law<T: Scalar>(n: usize, p: &T) -> Result<ScalarMeasure<T>> {
    if n == 0 || !p.is_probability() {
        return Err(domain(format!("binomial needs n >= 1 and p in [0,1], got n={n}, p={p}")));
    }
    let q = T::one() - p.clone();
    Measure::from_weights((0..=n).map(|k| {
        (
            T::from_frac(k as i64, n as i64),
            binomial::<T>(n, k) * pow(p, k) * pow(&q, n - k),
        )
    }))
}

/// Mean of the lower `alpha`-quantile of `Bin(n, p)` on the fraction grid.
pub fn binomial_quantile_expectation<T: Scalar>(n: usize, p: &T, alpha: &T) -> Result<T> {
    if !(p.is_positive() && *p < T::one()) {
        return Err(domain(format!("p must lie in (0,1), got {p}")));
    }
    Ok(quantile_distribution(&binomial_fraction_law(n, p)?, alpha)?.mean())
}

/// One-dimensional criterion for `Q = (1 - p) delta_a + p delta_b`,
/// `p = (mu - a) / (b - a)`: the lower `(1 - mu)`-quantile of the binomial
/// fraction law must have mean at most the low base atom.
pub fn binary_product_criterion<T: Scalar>(n: usize, a: &T, b: &T, mu: &T) -> Result<bool> {
    let base = binary_base(mu, a, b)?;
    let p = (mu.clone() - a.clone()) / (b.clone() - a.clone());
    Ok(binomial_quantile_expectation(n, &p, base.alpha())? <= *base.a())
}

/// Threshold on `a` for the symmetric family `b = 1 - a`, `mu = 1/2`:
/// `1/2 - C(2m, m) 2^{-2m-1}` with `m = floor(n / 2)`.
pub fn symmetric_threshold<T: Scalar>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(domain(format!("threshold needs n >= 2, got {n}")));
    }
    let m = n / 2;
    let half = T::from_frac(1, 2);
    Ok(half.clone() - binomial::<T>(2 * m, m) * pow(&half, 2 * m + 1))
}

/// Rows `(n, symmetric_threshold(n))` for `n = 2..=n_max`.
pub fn threshold_curve<T: Scalar>(n_max: usize) -> Result<Vec<(usize, T)>> {
    if n_max < 2 {
        return Err(domain(format!("curve needs n_max >= 2, got {n_max}")));
    }
    (2..=n_max).map(|n| Ok((n, symmetric_threshold(n)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Belief;
    use crate::Rational;

    fn r(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn two_point(a: &str, b: &str, p_b: &str) -> DiscreteMeasure<Rational> {
        Measure::new([
            (Belief::binary(r(a)).unwrap(), r("1") - r(p_b)),
            (Belief::binary(r(b)).unwrap(), r(p_b)),
        ])
        .unwrap()
    }

    #[test]
    fn multinomial_examples() {
        let sp = SymmetricProduct::new(two_point("1/4", "3/4", "1/2"), 2).unwrap();
        let law = multinomial_law(&sp, 100).unwrap();
        let weights: Vec<_> = law.atoms().iter().map(|(_, w)| w.clone()).collect();
        assert_eq!(weights.iter().filter(|w| **w == r("1/4")).count(), 2);
        assert_eq!(weights.iter().filter(|w| **w == r("1/2")).count(), 1);

        let sp = SymmetricProduct::new(two_point("1/4", "3/4", "1/2"), 4).unwrap();
        let law = multinomial_law(&sp, 100).unwrap();
        let mut weights: Vec<_> = law.atoms().iter().map(|(_, w)| w.clone()).collect();
        weights.sort();
        assert_eq!(weights, ["1/16", "1/16", "1/4", "1/4", "3/8"].map(r));

        let q = two_point("1/5", "3/5", "1/3");
        let law = multinomial_law(&SymmetricProduct::new(q.clone(), 1).unwrap(), 100).unwrap();
        assert_eq!(law.atoms().len(), 2);
        for (x, w) in q.atoms() {
            let h = EmpiricalDistribution::from_profile([x.clone()]).unwrap();
            assert_eq!(law.weight_of(&h), *w);
        }
    }

    #[test]
    fn multinomial_three_atoms_and_bound() {
        let q = Measure::new([
            (Belief::binary(r("0")).unwrap(), r("1/3")),
            (Belief::binary(r("1/2")).unwrap(), r("1/3")),
            (Belief::binary(r("1")).unwrap(), r("1/3")),
        ])
        .unwrap();
        let sp = SymmetricProduct::new(q, 3).unwrap();
        assert_eq!(sp.support_size(), 10);
        assert_eq!(multinomial_law(&sp, 10).unwrap().atoms().len(), 10);
        assert!(matches!(multinomial_law(&sp, 9), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn thresholds_come_in_pairs() {
        let mu = Prior::binary(r("1/2")).unwrap();
        let sp = SymmetricProduct::new(two_point("3/10", "7/10", "1/2"), 4).unwrap();
        assert!(!product_feasible(&sp, &mu, 1000).unwrap().feasible);
        let sp = SymmetricProduct::new(two_point("7/20", "13/20", "1/2"), 4).unwrap();
        assert!(product_feasible(&sp, &mu, 1000).unwrap().feasible);
        let sp = SymmetricProduct::new(two_point("1/10", "7/10", "2/3"), 1).unwrap();
        assert!(product_feasible(&sp, &Prior::binary(r("1/2")).unwrap(), 1000).unwrap().feasible);
    }

    #[test]
    fn prior_inconsistent_product_is_infeasible() {
        let sp = SymmetricProduct::new(two_point("1/4", "3/4", "1/2"), 3).unwrap();
        let v = product_feasible(&sp, &Prior::binary(r("1/3")).unwrap(), 1000).unwrap();
        assert!(!v.feasible && !v.prior_consistent);
    }

    #[test]
    fn quantile_expectations() {
        assert_eq!(binomial_quantile_expectation(2, &r("1/2"), &r("1/2")).unwrap(), r("1/4"));
        assert_eq!(binomial_quantile_expectation(5, &r("1/2"), &r("1/2")).unwrap(), r("5/16"));
        for n in 1..8 {
            assert_eq!(binomial_quantile_expectation(n, &r("2/7"), &r("1")).unwrap(), r("2/7"));
        }
        assert!(binomial_quantile_expectation(3, &r("0"), &r("1/2")).is_err());
    }

    #[test]
    fn thresholds() {
        let t = |n| symmetric_threshold::<Rational>(n).unwrap();
        assert_eq!(t(2), r("1/4"));
        assert_eq!(t(3), r("1/4"));
        assert_eq!(t(4), r("5/16"));
        assert_eq!(t(5), r("5/16"));
        assert_eq!(t(10), r("0.376953125"));
        assert_eq!(t(11), r("0.376953125"));
        assert!(symmetric_threshold::<Rational>(1).is_err());
        let curve = threshold_curve::<Rational>(11).unwrap();
        assert_eq!(curve.len(), 10);
        assert!(threshold_curve::<Rational>(1).is_err());
    }

    #[test]
    fn symmetric_criterion_matches_threshold() {
        let half = r("1/2");
        for n in 2..=9 {
            let t = symmetric_threshold::<Rational>(n).unwrap();
            let b = r("1") - t.clone();
            assert!(binary_product_criterion(n, &t, &b, &half).unwrap());
            let below = t.clone() - r("1/1000");
            assert!(!binary_product_criterion(n, &below, &(r("1") - below.clone()), &half).unwrap());
        }
    }
}
