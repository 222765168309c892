//! Variance-based polarization of a population and the structures that
//! maximize or bracket it.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::measures::{EmpiricalDistribution, PopulationLaw, Prior};
use crate::scalar::Scalar;
use crate::structures::{induced_population_law, InformationStructure, Profile};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarizationReport<T> {
    pub value: T,
    pub upper_bound: T,
    pub lower_bound: T,
    pub structure: Option<InformationStructure<T>>,
}

/// Population variance (denominator `n`) of one belief coordinate.
pub fn variance<T: Scalar>(h: &EmpiricalDistribution<T>, coordinate: usize) -> T {
    let n = T::from_usize(h.n());
    let (s1, s2) = h.counts().iter().fold((T::zero(), T::zero()), |(s1, s2), (x, c)| {
        let v = x.coord(coordinate).clone();
        let c = T::from_usize(*c);
        (s1 + c.clone() * v.clone(), s2 + c * v.clone() * v)
    });
    let mean = s1 / n.clone();
    s2 / n - mean.clone() * mean
}

/// Sum of per-coordinate variances.
pub fn pol<T: Scalar>(h: &EmpiricalDistribution<T>) -> T {
    let value = (0..h.states()).fold(T::zero(), |acc, w| acc + variance(h, w));
    debug_assert_eq!(value, pol_by_norm(h));
    value
}

/// `E_{x ~ H} ||x - E[H]||^2`, computed directly.
pub fn pol_by_norm<T: Scalar>(h: &EmpiricalDistribution<T>) -> T {
    let n = T::from_usize(h.n());
    let m = h.states();
    let mean: Vec<T> = (0..m)
        .map(|w| {
            h.counts()
                .iter()
                .fold(T::zero(), |acc, (x, c)| acc + T::from_usize(*c) * x.coord(w).clone())
                / n.clone()
        })
        .collect();
    h.counts().iter().fold(T::zero(), |acc, (x, c)| {
        let sq = (0..m).fold(T::zero(), |s, w| {
            let d = x.coord(w).clone() - mean[w].clone();
            s + d.clone() * d
        });
        acc + T::from_usize(*c) * sq
    }) / n
}

/// Binary states: expected variance of the state-1 coordinate. More
/// states: expected `pol`.
pub fn expected_polarization<T: Scalar>(p: &PopulationLaw<T>) -> T {
    let binary = p.states() == 2;
    p.atoms().iter().fold(T::zero(), |acc, (h, w)| {
        let v = if binary { variance(h, 1) } else { pol(h) };
        acc + w.clone() * v
    })
}

/// Reveals the state to agents `0..k` and nothing to the rest.
pub fn reveal_structure<T: Scalar>(n: usize, k: usize, mu: &Prior<T>) -> Result<InformationStructure<T>> {
    if n == 0 || k > n {
        return Err(domain(format!("cannot reveal to {k} of {n} agents")));
    }
    let m = mu.states();
    let states: Vec<String> = (0..m).map(|w| w.to_string()).collect();
    let signal_sets = (0..n)
        .map(|j| if j < k { states.clone() } else { vec!["-".to_string()] })
        .collect();
    let kernel = (0..m)
        .map(|w| {
            let profile: Profile = (0..n)
                .map(|j| if j < k { states[w].clone() } else { "-".into() })
                .collect();
            vec![(profile, T::one())]
        })
        .collect();
    InformationStructure::new(mu.clone(), signal_sets, kernel)
}

/// Closed-form value of [`reveal_structure`]:
/// `k (n - k) / n^2` times [`dispersion`].
pub fn reveal_value<T: Scalar>(n: usize, k: usize, mu: &Prior<T>) -> T {
    let spread = dispersion(mu);
    let nn = T::from_usize(n);
    T::from_usize(k * (n - k)) / (nn.clone() * nn) * spread
}

/// `mu (1 - mu)` for binary states, `sum_w mu_w (1 - mu_w)` otherwise.
fn dispersion<T: Scalar>(mu: &Prior<T>) -> T {
    if mu.states() == 2 {
        let p = mu.mass(1).clone();
        return p.clone() * (T::one() - p);
    }
    (0..mu.states()).fold(T::zero(), |acc, w| {
        let p = mu.mass(w).clone();
        acc + p.clone() * (T::one() - p)
    })
}

/// Even `n`: the exact maximum, attained by revealing the state to half
/// the agents. Odd `n`: revealing to `(n + 1) / 2` agents, reported as the
/// lower end of a bracket.
pub fn max_polarization<T: Scalar>(n: usize, mu: &Prior<T>) -> Result<PolarizationReport<T>> {
    if n == 0 {
        return Err(domain("polarization needs at least one agent"));
    }
    let upper = dispersion(mu) / T::from_int(4);
    let k = n.div_ceil(2);
    let g = reveal_structure(n, k, mu)?;
    let value = expected_polarization(&induced_population_law(&g)?);
    debug_assert_eq!(value, reveal_value(n, k, mu));
    Ok(PolarizationReport {
        lower_bound: value.clone(),
        upper_bound: upper,
        value,
        structure: Some(g),
    })
}

/// Largest number of kernel pairs `search_polarization` will visit.
pub const SEARCH_BOUND: u128 = 200_000;

/// Exhaustive search over binary-state structures in which every agent has
/// two signals and every conditional profile probability is a multiple of
/// `1 / denominator`. The best value found is a lower bound on the maximum.
pub fn search_polarization<T: Scalar>(
    n: usize,
    mu: &Prior<T>,
    denominator: usize,
) -> Result<PolarizationReport<T>> {
    if n == 0 || denominator == 0 {
        return Err(domain("search needs n >= 1 and a positive denominator"));
    }
    if mu.states() != 2 {
        return Err(domain("search is implemented for binary states"));
    }
    if n > 4 {
        return Err(domain(format!("search over {n} agents is too large")));
    }
    let profiles: Vec<Profile> = (0..1usize << n)
        .map(|bits| (0..n).map(|j| ((bits >> j) & 1).to_string()).collect())
        .collect();
    let per_state = (1..profiles.len() as u128).fold(1u128, |acc, i| {
        acc.saturating_mul(denominator as u128 + i) / i
    });
    let needed = per_state.saturating_mul(per_state);
    if needed > SEARCH_BOUND {
        return Err(Error::ResourceLimit {
            what: "polarization search grid".into(),
            needed,
            bound: SEARCH_BOUND,
        });
    }
    let signal_sets = vec![vec!["0".to_string(), "1".to_string()]; n];
    let kernels = compositions(denominator, profiles.len());
    let d = T::from_usize(denominator);
    let to_kernel = |c: &Vec<usize>| -> Vec<(Profile, T)> {
        c.iter()
            .zip(&profiles)
            .filter(|(k, _)| **k > 0)
            .map(|(k, s)| (s.clone(), T::from_usize(*k) / d.clone()))
            .collect()
    };
    let best = kernels
        .par_iter()
        .map(|k0| {
            let mut best: Option<(T, usize)> = None;
            for (i1, k1) in kernels.iter().enumerate() {
                let g = InformationStructure::new(
                    mu.clone(),
                    signal_sets.clone(),
                    vec![to_kernel(k0), to_kernel(k1)],
                )
                .expect("grid kernel is valid");
                let v = expected_polarization(&induced_population_law(&g).expect("posteriors exist"));
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, i1));
                }
            }
            best.expect("non-empty grid")
        })
        .enumerate()
        .map(|(i0, (v, i1))| (v, i0, i1))
        // ties resolve to the lexicographically first pair, whatever the schedule
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a })
        .expect("non-empty grid");
    let (value, i0, i1) = best;
    let g = InformationStructure::new(
        mu.clone(),
        signal_sets,
        vec![to_kernel(&kernels[i0]), to_kernel(&kernels[i1])],
    )?;
    Ok(PolarizationReport {
        lower_bound: value.clone(),
        upper_bound: dispersion(mu) / T::from_int(4),
        value,
        structure: Some(g),
    })
}

/// All ways to write `total` as an ordered sum of `parts` non-negative
/// integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            go(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}
