mod common;

use common::*;
use num_traits::{One, Zero};
use popbelief::feasibility::{base_law, binary_base, check_feasible, conditional_tilt};
use popbelief::json::Json;
use popbelief::measures::{
    barycenter, empirical_to_measure, law_expected_measure, quantile_distribution,
    upper_quantile_distribution, Belief, Measure,
};
use popbelief::mps::simplex::{solve_feasibility, EqualitySystem, Feasibility};
use popbelief::mps::{
    is_mps_binary_base, mps_decompose, verify_binary_certificate, verify_binary_split,
    verify_certificate, verify_decomposition,
};
use popbelief::persuasion::persuasion_limit_value;
use popbelief::polarization::{expected_polarization, pol, pol_by_norm, variance};
use popbelief::product::{product_feasible, symmetric_threshold};
use popbelief::structures::{expand_scheme, induced_population_law, synthesize};
use popbelief::{
    DiscreteMeasure, EmpiricalDistribution, FeasibilityVerdict, PopulationLaw, Prior, Rational, Scalar,
    ScalarMeasure, SymmetricProduct,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn scalar_measure(points: &[(i64, i64)], den: i64) -> ScalarMeasure {
    let total: i64 = points.iter().map(|(_, w)| w).sum();
    Measure::from_weights(points.iter().map(|&(x, w)| (frac(x, den), frac(w, total)))).unwrap()
}

fn random_discrete(rng: &mut impl Rng, states: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=4);
    let weights = random_weights(rng, k, 12);
    Measure::from_weights(weights.into_iter().map(|w| (random_belief(rng, states, 8), w))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn barycenter_is_linear(seed in any::<u64>(), states in 2usize..=4) {
        let mut rng = rng(seed);
        let m1 = random_discrete(&mut rng, states);
        let m2 = random_discrete(&mut rng, states);
        let lambda = frac(rng.random_range(0..=7), 7);
        let mix = Measure::mixture([(lambda.clone(), &m1), (Rational::one() - lambda.clone(), &m2)]).unwrap();
        let (b1, b2) = (barycenter(&m1), barycenter(&m2));
        let expected: Vec<Rational> = b1.coords().iter().zip(b2.coords())
            .map(|(x, y)| lambda.clone() * x.clone() + (Rational::one() - lambda.clone()) * y.clone())
            .collect();
        prop_assert_eq!(barycenter(&mix).coords().to_vec(), expected);
    }

    #[test]
    fn complementary_quantiles(
        points in prop::collection::vec((0i64..=12, 1i64..=9), 1..6),
        alpha_num in 1i64..=11,
    ) {
        let m = scalar_measure(&points, 12);
        let alpha = frac(alpha_num, 12);
        let lower = quantile_distribution(&m, &alpha).unwrap();
        let total = lower.atoms().iter().fold(Rational::zero(), |a, (_, w)| a + w.clone());
        prop_assert!(total.is_one());
        let rest = Rational::one() - alpha.clone();
        let upper = upper_quantile_distribution(&m, &rest).unwrap();
        prop_assert_eq!(alpha * lower.mean() + rest * upper.mean(), m.mean());
    }

    #[test]
    fn empirical_measures(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=5);
        let draw = |rng: &mut ChaCha8Rng| EmpiricalDistribution::from_profile((0..n).map(|_| random_binary_belief(rng, 4))).unwrap();
        let (h1, h2) = (draw(&mut rng), draw(&mut rng));
        prop_assert_eq!(law_expected_measure(&PopulationLaw::dirac(h1.clone())), empirical_to_measure(&h1));
        prop_assert_eq!(h1 == h2, empirical_to_measure(&h1) == empirical_to_measure(&h2));
    }

    #[test]
    fn tilts_mix_back(seed in any::<u64>(), states in 2usize..=3) {
        let mut rng = rng(seed);
        let tp = random_discrete(&mut rng, states);
        let Ok(mu) = Prior::new(barycenter(&tp)) else { return Ok(()) };
        let tilts: Vec<DiscreteMeasure> = (0..states).map(|w| conditional_tilt(&tp, &mu, w).unwrap()).collect();
        let mix = Measure::mixture(tilts.iter().enumerate().map(|(w, t)| (mu.mass(w).clone(), t))).unwrap();
        prop_assert_eq!(mix, tp);
    }

    #[test]
    fn binary_base_atoms_ordered(a in 0i64..10, gap1 in 1i64..10, gap2 in 1i64..10) {
        let den = a + gap1 + gap2;
        let (a, mu, b) = (frac(a, den), frac(a + gap1, den), frac(a + gap1 + gap2, den));
        let base = binary_base(&mu, &a, &b).unwrap();
        prop_assert!(base.a() < base.b());
        prop_assert_eq!(base.mean(), (mu.clone() - a.clone()) / (b - a));
    }

    #[test]
    fn spread_verdicts_verify(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let states = if seed % 3 == 0 { 3 } else { 2 };
        let Some((law, mu)) = random_law(&mut rng, 4, states, 4, 4, 12) else { return Ok(()) };
        let base = base_law(&law, &mu).unwrap();
        let verdict = mps_decompose(&law, &base);
        let ok = match (verdict.witness(), verdict.certificate()) {
            (Some(d), None) => verify_decomposition(&law, &base, d),
            (None, Some(c)) => verify_certificate(&law, &base, c),
            _ => false,
        };
        prop_assert!(ok);
        let v = check_feasible(&law, &mu);
        prop_assert!(v.verify(&law, &mu));
        prop_assert_eq!(v.feasible, verdict.is_spread());
    }

    #[test]
    fn two_point_laws_match_one_dimensional_test(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=6usize);
        let (lo, hi) = (random_binary_belief(&mut rng, 6), random_binary_belief(&mut rng, 6));
        prop_assume!(lo.coord(1) < hi.coord(1));
        let k = rng.random_range(1..=n + 1);
        let points = rand::seq::index::sample(&mut rng, n + 1, k);
        let weights = random_weights(&mut rng, k, 12);
        let fr: ScalarMeasure = Measure::new(points.into_iter().map(|i| frac(i as i64, n as i64)).zip(weights)).unwrap();
        let f = fr.mean();
        prop_assume!(!f.is_zero() && !f.is_one());
        let (a, b) = (lo.coord(1).clone(), hi.coord(1).clone());
        let mu = a.clone() + (b.clone() - a.clone()) * f;
        let law = PopulationLaw::from_fraction_law(n, &lo, &hi, &fr).unwrap();
        let base = binary_base(&mu, &a, &b).unwrap();
        let one_dim = is_mps_binary_base(&fr, &base);
        match (one_dim.witness(), one_dim.certificate()) {
            (Some(split), _) => prop_assert!(verify_binary_split(&fr, &base, split)),
            (_, Some(c)) => prop_assert!(verify_binary_certificate(&fr, &base, c)),
            _ => prop_assert!(false),
        }
        prop_assert_eq!(check_feasible(&law, &Prior::binary(mu).unwrap()).feasible, one_dim.is_spread());
    }

    #[test]
    fn boundary_perturbation_flips(n in 2usize..=7, eps_den in 2i64..=1000) {
        // fraction law with lower (1/2)-quantile mean exactly at the low atom
        let half = r("1/2");
        let a = symmetric_threshold::<Rational>(n).unwrap();
        let b = Rational::one() - a.clone();
        let q = |a: &Rational, b: &Rational| -> DiscreteMeasure {
            Measure::new([(Belief::binary(a.clone()).unwrap(), half.clone()), (Belief::binary(b.clone()).unwrap(), half.clone())]).unwrap()
        };
        let mu = Prior::binary(half.clone()).unwrap();
        let at = product_feasible(&SymmetricProduct::new(q(&a, &b), n).unwrap(), &mu, 10_000).unwrap();
        prop_assert!(at.feasible);
        let eps = frac(1, eps_den);
        let below = a.clone() - eps.clone() * a.clone();
        let b2 = Rational::one() - below.clone();
        let off = product_feasible(&SymmetricProduct::new(q(&below, &b2), n).unwrap(), &mu, 10_000).unwrap();
        prop_assert!(!off.feasible);
    }

    #[test]
    fn induced_laws_are_martingales_and_feasible(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let states = rng.random_range(2..=3);
        let mu = loop {
            if let Ok(mu) = Prior::new(random_belief(&mut rng, states, 6)) { break mu; }
        };
        let n = rng.random_range(1..=3);
        let g = random_structure(&mut rng, n, 3, &mu, 8);
        let law = induced_population_law(&g).unwrap();
        prop_assert_eq!(&barycenter(&law_expected_measure(&law)), mu.belief());
        let v = check_feasible(&law, &mu);
        prop_assert!(v.feasible, "implementable law judged infeasible: {}", law.to_json());
        if states == 2 {
            let p = mu.mass(1).clone();
            prop_assert!(expected_polarization(&law) <= p.clone() * (Rational::one() - p) / r("4"));
        }
    }

    #[test]
    fn synthesis_roundtrip_and_anonymity(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let Some((law, mu)) = random_law(&mut rng, 4, 2, 3, 3, 12) else { return Ok(()) };
        let v = check_feasible(&law, &mu);
        prop_assume!(v.feasible);
        let g = expand_scheme(&synthesize(&law, &mu, v.decomposition.as_ref().unwrap()).unwrap(), 1_000_000).unwrap();
        prop_assert_eq!(induced_population_law(&g).unwrap(), law);
        for i in 0..g.agents() {
            for j in i + 1..g.agents() {
                prop_assert_eq!(&g.swap_agents(i, j), &g);
            }
        }
    }

    #[test]
    fn pol_definitions_agree(seed in any::<u64>(), states in 2usize..=4) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=6);
        let h = EmpiricalDistribution::from_profile((0..n).map(|_| random_belief(&mut rng, states, 7))).unwrap();
        let sum = (0..states).fold(Rational::zero(), |a, w| a + variance(&h, w));
        prop_assert_eq!(pol_by_norm(&h), sum.clone());
        prop_assert_eq!(pol(&h), sum);
    }

    #[test]
    fn limit_values_are_monotone(coeffs in prop::collection::vec(0i64..5, 1..4), mu_num in 1i64..5, gap in 1i64..5) {
        let (mu, tau) = (frac(mu_num, 10), frac(mu_num + gap, 10));
        let u = |x: &Rational| {
            coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x.clone() + Rational::from_int(*c))
        };
        let report = persuasion_limit_value(&mu, &tau, u, 1, 3).unwrap();
        prop_assert!(report.monotone);
    }

    #[test]
    fn simplex_answers_verify(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4), rhs in prop::collection::vec(-4i64..=4, 3)) {
        let mut sys = EqualitySystem::new(4);
        for (row, b) in rows.iter().zip(rhs.iter().cycle()) {
            sys.push_row(row.iter().map(|&v| Rational::from_int(v)).collect(), Rational::from_int(*b));
        }
        match solve_feasibility(&sys) {
            Feasibility::Feasible(x) => prop_assert!(sys.is_solution(&x)),
            Feasibility::Infeasible(y) => prop_assert!(sys.is_farkas_certificate(&y)),
        }
    }

    #[test]
    fn json_roundtrip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let Some((law, mu)) = random_law(&mut rng, 4, 2 + (seed % 2) as usize, 3, 3, 12) else { return Ok(()) };
        let text = serde_json::to_string(&law.to_json()).unwrap();
        prop_assert_eq!(&PopulationLaw::decode(&serde_json::from_str(&text).unwrap()).unwrap(), &law);
        let v = check_feasible(&law, &mu);
        let text = serde_json::to_string(&v.to_json()).unwrap();
        prop_assert_eq!(FeasibilityVerdict::decode(&serde_json::from_str(&text).unwrap()).unwrap(), v);
    }
}

/// Every law produced by a small two-signal structure must be judged
/// feasible, so no infeasible verdict is ever contradicted by a structure
/// in this family.
#[test]
fn small_structure_families_are_all_feasible() {
    for (n, den) in [(2usize, 3usize), (3, 2)] {
        for mu in ["1/2", "1/3"] {
            let mu = Prior::binary(r(mu)).unwrap();
            let profiles: Vec<Vec<String>> = (0..1usize << n)
                .map(|bits| (0..n).map(|j| ((bits >> j) & 1).to_string()).collect())
                .collect();
            let kernels = compositions(den, profiles.len());
            let to_kernel = |c: &Vec<usize>| -> Vec<(Vec<String>, Rational)> {
                c.iter().zip(&profiles).filter(|(k, _)| **k > 0)
                    .map(|(k, s)| (s.clone(), frac(*k as i64, den as i64))).collect()
            };
            for k0 in &kernels {
                for k1 in &kernels {
                    let g = popbelief::InformationStructure::new(
                        mu.clone(),
                        vec![vec!["0".into(), "1".into()]; n],
                        vec![to_kernel(k0), to_kernel(k1)],
                    )
                    .unwrap();
                    let law = induced_population_law(&g).unwrap();
                    assert!(check_feasible(&law, &mu).feasible, "{}", law.to_json());
                }
            }
        }
    }
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|k| compositions(total - k, parts - 1).into_iter().map(move |mut rest| {
            rest.insert(0, k);
            rest
        }))
        .collect()
}

#[test]
fn threshold_envelope() {
    for m in 10..=40usize {
        let t = symmetric_threshold::<Rational>(2 * m).unwrap().to_f64();
        let lower = 0.5 - 1.0 / (2.0 * std::f64::consts::PI * m as f64).sqrt() - 0.01;
        assert!(lower <= t && t <= 0.5, "m={m}: {t}");
    }
}

#[test]
fn thresholds_pair_and_increase() {
    let curve = popbelief::product::threshold_curve::<Rational>(41).unwrap();
    for pair in curve.chunks(2) {
        if let [(_, even), (_, odd)] = pair {
            assert_eq!(even, odd);
        }
    }
    for w in curve.windows(3).step_by(2) {
        assert!(w[0].1 < w[2].1);
    }
}
