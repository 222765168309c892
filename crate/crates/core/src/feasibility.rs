//! Feasibility of a population law under a prior.
//!
//! From a law `P` we form its expected measure `tp`, tilt it by each state
//! (`tp_w(x) = x_w tp(x) / mu_w`), and ask whether `P` is a mean-preserving
//! spread of `sum_w mu_w delta_{tp_w}`.


use crate::error::{domain, Error, Result};
use crate::measures::{barycenter, law_expected_measure, DiscreteMeasure, Measure, PopulationLaw, Prior};
use crate::mps::{
    mps_decompose, BinaryBase, InfeasibilityCertificate, SpreadDecomposition, SpreadTarget,
    SpreadVerdict,
};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityVerdict<T> {
    pub feasible: bool,
    pub prior_consistent: bool,
    /// Absent when the law is not prior-consistent (the tilts do not
    /// normalize).
    pub base: Option<SpreadTarget<T>>,
    pub decomposition: Option<SpreadDecomposition<T>>,
    pub certificate: Option<InfeasibilityCertificate<T>>,
}

/// State-`state` tilt of `tp`. Atoms with a zero coordinate are dropped.
pub fn conditional_tilt<T: Scalar>(
    tp: &DiscreteMeasure<T>,
    mu: &Prior<T>,
    state: usize,
) -> Result<DiscreteMeasure<T>> {
    if state >= mu.states() {
        return Err(domain(format!("state {state} out of range for {} states", mu.states())));
    }
    let center = barycenter(tp);
    if center != *mu.belief() {
        return Err(Error::PriorInconsistency {
            barycenter: center.to_string(),
            prior: mu.belief().to_string(),
        });
    }
    let m = mu.mass(state).clone();
    Measure::from_weights(
        tp.atoms()
            .iter()
            .map(|(x, w)| (x.clone(), w.clone() * x.coord(state).clone() / m.clone())),
    )
}

pub fn base_law<T: Scalar>(p: &PopulationLaw<T>, mu: &Prior<T>) -> Result<SpreadTarget<T>> {
    let tp = law_expected_measure(p);
    let components = (0..mu.states())
        .map(|w| Ok((mu.mass(w).clone(), conditional_tilt(&tp, mu, w)?)))
        .collect::<Result<Vec<_>>>()?;
    SpreadTarget::new(components)
}

/// Total feasibility check: prior inconsistency is reported as an
/// infeasible verdict carrying a mean-mismatch certificate.
pub fn check_feasible<T: Scalar>(p: &PopulationLaw<T>, mu: &Prior<T>) -> FeasibilityVerdict<T> {
    let center = barycenter(&law_expected_measure(p));
    if center != *mu.belief() {
        return FeasibilityVerdict {
            feasible: false,
            prior_consistent: false,
            base: None,
            decomposition: None,
            certificate: Some(InfeasibilityCertificate::MeanMismatch {
                law_mean: center.coords().to_vec(),
                target_mean: mu.belief().coords().to_vec(),
            }),
        };
    }
    let base = base_law(p, mu).expect("prior-consistent law");
    let verdict = mps_decompose(p, &base);
    wrap(base, verdict)
}

pub(crate) fn wrap<T: Scalar>(
    base: SpreadTarget<T>,
    verdict: SpreadVerdict<SpreadDecomposition<T>, T>,
) -> FeasibilityVerdict<T> {
    let (feasible, decomposition, certificate) = match verdict {
        SpreadVerdict::Spread(d) => (true, Some(d), None),
        SpreadVerdict::NotSpread(c) => (false, None, Some(c)),
    };
    FeasibilityVerdict {
        feasible,
        prior_consistent: true,
        base: Some(base),
        decomposition,
        certificate,
    }
}

/// Re-checks a prior-mismatch certificate against the law and prior.
pub fn verify_prior_mismatch<T: Scalar>(
    p: &PopulationLaw<T>,
    mu: &Prior<T>,
    cert: &InfeasibilityCertificate<T>,
) -> bool {
    match cert {
        InfeasibilityCertificate::MeanMismatch { law_mean, target_mean } => {
            let center = barycenter(&law_expected_measure(p));
            law_mean.as_slice() == center.coords()
                && target_mean.as_slice() == mu.belief().coords()
                && center != *mu.belief()
        }
        _ => false,
    }
}

/// Two-posterior base for a binary state space with posteriors `a < mu < b`
/// (probabilities of state 1). The low atom, with weight `1 - mu`, is the
/// expected fraction of agents at `b` in state 0; the high atom, with weight
/// `mu`, is that fraction in state 1.
pub fn binary_base<T: Scalar>(mu: &T, a: &T, b: &T) -> Result<BinaryBase<T>> {
    if a.is_negative() || !(a < mu && mu < b) || *b > T::one() {
        return Err(domain(format!("binary base needs 0 <= a < mu < b <= 1, got a={a}, mu={mu}, b={b}")));
    }
    let spread = b.clone() - a.clone();
    let lift = mu.clone() - a.clone();
    let high = lift.clone() * b.clone() / (spread.clone() * mu.clone());
    let low = lift * (T::one() - b.clone()) / (spread * (T::one() - mu.clone()));
    BinaryBase::new(low, high, T::one() - mu.clone())
}

impl<T: Scalar> FeasibilityVerdict<T> {
    /// Checks the verdict's internal consistency against its inputs.
    pub fn verify(&self, p: &PopulationLaw<T>, mu: &Prior<T>) -> bool {
        if !self.prior_consistent {
            return !self.feasible
                && self.base.is_none()
                && self.decomposition.is_none()
                && self
                    .certificate
                    .as_ref()
                    .is_some_and(|c| verify_prior_mismatch(p, mu, c));
        }
        let Some(base) = &self.base else { return false };
        if base_law(p, mu).ok().as_ref() != Some(base) {
            return false;
        }
        match (&self.decomposition, &self.certificate, self.feasible) {
            (Some(d), None, true) => crate::mps::verify_decomposition(p, base, d),
            (None, Some(c), false) => crate::mps::verify_certificate(p, base, c),
            _ => false,
        }
    }
}
