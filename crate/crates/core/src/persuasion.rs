//! Private persuasion of a homogeneous population with a binary state: a
//! sender who values the adopting fraction through a non-decreasing `u`
//! chooses a symmetric signalling scheme; receivers adopt at posterior `tau`.

use crate::error::{domain, invariant, Result};
use crate::measures::{Belief, EmpiricalDistribution, Measure, PopulationLaw, Prior, ScalarMeasure};
use crate::scalar::Scalar;
use crate::structures::SymmetricScheme;

/// Sender utility on the grid `0, 1/n, ..., 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenderUtility<T> {
    values: Vec<T>,
}

impl<T: Scalar> SenderUtility<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invariant("utility needs at least the values at 0 and 1"));
        }
        if let Some(i) = (1..values.len()).find(|&i| values[i] < values[i - 1]) {
            return Err(invariant(format!(
                "utility decreases between grid points {} and {i}",
                i - 1
            )));
        }
        Ok(Self { values })
    }

    /// Samples `f` on the `1/n` grid.
    pub fn from_fn(n: usize, f: impl Fn(&T) -> T) -> Result<Self> {
        if n == 0 {
            return Err(domain("grid needs n >= 1"));
        }
        Self::new((0..=n).map(|i| f(&grid_point(i, n))).collect())
    }

    pub fn linear(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| x.clone())
    }

    /// `1` once at least `k` of the `n` agents adopt, else `0`.
    pub fn threshold(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(domain(format!("threshold {k} exceeds {n} agents")));
        }
        Self::new((0..=n).map(|i| if i >= k { T::one() } else { T::zero() }).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &T {
        &self.values[i]
    }
}

fn grid_point<T: Scalar>(i: usize, n: usize) -> T {
    T::from_usize(i) / T::from_usize(n)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersuasionInstance<T> {
    n: usize,
    mu: T,
    tau: T,
    u: SenderUtility<T>,
}

impl<T: Scalar> PersuasionInstance<T> {
    pub fn new(mu: T, tau: T, u: SenderUtility<T>) -> Result<Self> {
        if !(mu.is_positive() && mu < tau && tau < T::one()) {
            return Err(invariant(format!("need 0 < mu < tau < 1, got mu={mu}, tau={tau}")));
        }
        Ok(Self { n: u.n(), mu, tau, u })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> &T {
        &self.mu
    }

    pub fn tau(&self) -> &T {
        &self.tau
    }

    pub fn utility(&self) -> &SenderUtility<T> {
        &self.u
    }

    /// Probability that a given agent is told to adopt in state 0:
    /// `mu (1 - tau) / (tau (1 - mu))`.
    pub fn adoption_mean(&self) -> T {
        let one = T::one();
        self.mu.clone() * (one.clone() - self.tau.clone())
            / (self.tau.clone() * (one - self.mu.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersuasionSolution<T> {
    pub value: T,
    /// Law of the adopting fraction in state 0.
    pub adoption_law_omega0: ScalarMeasure<T>,
    pub scheme: SymmetricScheme<T>,
}

/// Indices of the strict upper hull of `(i/n, u_i)`; collinear points are
/// dropped.
pub fn upper_hull<T: Scalar>(u: &SenderUtility<T>) -> Vec<usize> {
    let n = u.n();
    let x = |i: usize| grid_point::<T>(i, n);
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=n {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly above the chord a..i
            let cross = (x(b) - x(a)) * (u.at(i).clone() - u.at(a).clone())
                - (u.at(b).clone() - u.at(a).clone()) * (x(i) - x(a));
            if cross.is_negative() {
                break;
            }
            hull.pop();
        }
        hull.push(i);
    }
    hull
}

/// Upper concave envelope of `u` on the grid, evaluated at `y`, with a
/// grid law of mean `y` attaining it (one atom if `y` is a grid point on the
/// envelope, otherwise the two hull vertices around `y`).
pub fn grid_concavification<T: Scalar>(u: &SenderUtility<T>, y: &T) -> Result<(T, ScalarMeasure<T>)> {
    if !y.is_probability() {
        return Err(domain(format!("y = {y} outside [0,1]")));
    }
    let n = u.n();
    let hull = upper_hull(u);
    let x = |i: usize| grid_point::<T>(i, n);
    let seg = hull
        .windows(2)
        .find(|w| x(w[0]) <= *y && *y <= x(w[1]))
        .expect("hull spans [0,1]");
    let (l, r) = (seg[0], seg[1]);
    let (xl, xr) = (x(l), x(r));
    let lambda = (xr.clone() - y.clone()) / (xr.clone() - xl.clone());
    let value = lambda.clone() * u.at(l).clone() + (T::one() - lambda.clone()) * u.at(r).clone();

    let scaled = y.clone() * T::from_usize(n);
    if scaled.is_integer_value() {
        let i = scaled.to_index().expect("grid index");
        if *u.at(i) == value {
            return Ok((value, Measure::dirac(y.clone())));
        }
    }
    let witness = Measure::from_weights([(xl, lambda.clone()), (xr, T::one() - lambda)])?;
    Ok((value, witness))
}

/// `mu u(1) + (1 - mu) cav_n(u)(mu (1 - tau) / (tau (1 - mu)))`.
pub fn persuasion_value<T: Scalar>(inst: &PersuasionInstance<T>) -> Result<T> {
    let (cav, _) = grid_concavification(&inst.u, &inst.adoption_mean())?;
    let mu = inst.mu.clone();
    Ok(mu.clone() * inst.u.at(inst.n).clone() + (T::one() - mu) * cav)
}

/// Optimal symmetric scheme: in state 1 every agent is told to adopt; in
/// state 0 an adopting fraction is drawn from the envelope witness and
/// that many agents, chosen uniformly, are told to adopt.
pub fn persuasion_policy<T: Scalar>(inst: &PersuasionInstance<T>) -> Result<PersuasionSolution<T>> {
    let n = inst.n;
    let (cav, q) = grid_concavification(&inst.u, &inst.adoption_mean())?;
    let adopt = Belief::binary(inst.tau.clone())?;
    let reject = Belief::binary(T::zero())?;
    let omega1 = PopulationLaw::dirac(EmpiricalDistribution::new(n, [(adopt.clone(), n)])?);
    let omega0 = PopulationLaw::new(
        q.atoms()
            .iter()
            .map(|(x, w)| {
                let k = (x.clone() * T::from_usize(n)).to_index().expect("grid fraction");
                Ok((EmpiricalDistribution::binary_split(n, &reject, &adopt, k)?, w.clone()))
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let scheme = SymmetricScheme::new(Prior::binary(inst.mu.clone())?, vec![omega0, omega1])?;
    let mu = inst.mu.clone();
    Ok(PersuasionSolution {
        value: mu.clone() * inst.u.at(n).clone() + (T::one() - mu) * cav,
        adoption_law_omega0: q,
        scheme,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitReport<T> {
    /// `(n, V_n)` along the doubling schedule.
    pub rows: Vec<(usize, T)>,
    /// Whether `V_n` never decreased along the schedule.
    pub monotone: bool,
}

/// `V_n` for `n = base_n, 2 base_n, 4 base_n, ...` (`refinements + 1` rows).
pub fn persuasion_limit_value<T: Scalar>(
    mu: &T,
    tau: &T,
    u: impl Fn(&T) -> T,
    base_n: usize,
    refinements: usize,
) -> Result<LimitReport<T>> {
    let mut rows = Vec::with_capacity(refinements + 1);
    let mut n = base_n;
    for _ in 0..=refinements {
        let inst = PersuasionInstance::new(mu.clone(), tau.clone(), SenderUtility::from_fn(n, &u)?)?;
        rows.push((n, persuasion_value(&inst)?));
        n = n
            .checked_mul(2)
            .ok_or_else(|| domain("refinement schedule overflows"))?;
    }
    let monotone = rows.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok(LimitReport { rows, monotone })
}
