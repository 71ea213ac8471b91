//! Property tests for the exact rational route.

use std::collections::BTreeSet;

use aaphase::constraint::{enumerate_candidates, PartialSpectrum};
use aaphase::phase::{
    angle_distance, check_cyclicality, gamma_from_single_eigenvalue_phi, gamma_from_single_eigenvalue_tau, gauge_shift,
    geometric_phase, Cyclicity,
};
use aaphase::rational::{lcm_rationals, rationalize, Rational, RationalSet};
use aaphase::spectrum::{Spectrum, StateDecomposition};
use num_complex::Complex64;
use proptest::prelude::*;

fn rational(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (-max_num..=max_num, 1..=max_den).prop_map(|(p, q)| Rational::frac(p, q))
}

fn nonzero_rational(max: i64) -> impl Strategy<Value = Rational> {
    (1..=max, 1..=max, any::<bool>()).prop_map(|(p, q, neg)| Rational::frac(if neg { -p } else { p }, q))
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (0.1f64..1.0, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// A spectrum with distinct levels and a state occupying all of them.
fn fixture() -> impl Strategy<Value = (Spectrum, StateDecomposition)> {
    prop::collection::btree_set((-12i64..=12, 1i64..=6).prop_map(|(p, q)| Rational::frac(p, q)), 2..6)
        .prop_flat_map(|levels| {
            let n = levels.len();
            (Just(levels), prop::collection::vec(amplitude(), n))
        })
        .prop_map(|(levels, amps)| {
            let s = Spectrum::new(1.0, levels.into_iter().enumerate().map(|(i, l)| (format!("l{i}"), l))).unwrap();
            let st = StateDecomposition::normalized(&s, amps.into_iter().enumerate().map(|(i, a)| (format!("l{i}"), a))).unwrap();
            (s, st)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lcm_divides_and_is_minimal(xs in prop::collection::vec(nonzero_rational(12), 1..6)) {
        let set = RationalSet::new(xs.clone()).unwrap();
        let l = lcm_rationals(&set).unwrap();
        prop_assert!(l.is_positive());
        for x in &xs {
            prop_assert!((&l / &x.abs()).is_integer());
        }
        // Every common multiple is an integer multiple of the first element.
        let x0 = xs[0].abs();
        let bound = (&l / &x0).to_integer().unwrap();
        let mut k = Rational::one();
        while k.to_integer().unwrap() < bound {
            let candidate = &k * &x0;
            prop_assert!(!xs.iter().all(|x| (&candidate / &x.abs()).is_integer()), "smaller multiple {candidate}");
            k = &k + &Rational::one();
        }
    }

    #[test]
    fn rationalize_recovers_small_fractions(p in -5000i64..5000, q in 1i64..1000) {
        let x = p as f64 / q as f64;
        prop_assert_eq!(rationalize(x, 1000, 1e-12).unwrap(), Rational::frac(p, q));
    }

    #[test]
    fn gamma_is_gauge_invariant((s, st) in fixture(), c in rational(20, 7)) {
        let a = geometric_phase(&s, &st).unwrap();
        let b = geometric_phase(&gauge_shift(&s, &c), &st).unwrap();
        prop_assert!(angle_distance(a.gamma, b.gamma) < 1e-10);
        prop_assert_eq!(a.tau.exact, b.tau.exact);
    }

    #[test]
    fn gamma_ignores_global_phase_and_level_order((s, st) in fixture(), theta in -3.0f64..3.0) {
        let base = geometric_phase(&s, &st).unwrap();
        let rotated = StateDecomposition::new(&s, st.entries().iter().map(|(l, a)| (l.clone(), a * Complex64::from_polar(1.0, theta)))).unwrap();
        prop_assert!(angle_distance(base.gamma, geometric_phase(&s, &rotated).unwrap().gamma) < 1e-10);

        let reversed = Spectrum::from_levels(s.unit(), s.levels().iter().rev().cloned()).unwrap();
        let r = geometric_phase(&reversed, &st).unwrap();
        prop_assert!(angle_distance(base.gamma, r.gamma) < 1e-10);
        prop_assert_eq!(base.phi.exact, r.phi.exact);
    }

    #[test]
    fn single_eigenvalue_routes_agree((s, st) in fixture()) {
        let r = geometric_phase(&s, &st).unwrap();
        prop_assert_eq!(check_cyclicality(&s, &st).unwrap(), Cyclicity::Cyclic);
        prop_assert!(r.phi.exact.is_some());
        for level in s.levels() {
            let lambda = level.value.exact().unwrap();
            if lambda.is_zero() {
                continue;
            }
            let g1 = gamma_from_single_eigenvalue_phi(lambda, r.mean_energy, r.phi_branch_for(&level.label).unwrap()).unwrap();
            let g2 = gamma_from_single_eigenvalue_tau(lambda, r.mean_energy, r.tau.value).unwrap();
            prop_assert!(angle_distance(g1, r.gamma) < 1e-10);
            prop_assert!(angle_distance(g2, r.gamma) < 1e-10);
        }
    }

    #[test]
    fn period_returns_every_level((s, st) in fixture()) {
        let r = geometric_phase(&s, &st).unwrap();
        let tau = r.tau.exact.unwrap();
        let phi = r.phi.exact.unwrap();
        // lambda tau + phi / 2 is the branch integer for every level.
        for level in s.levels() {
            let n = &(level.value.exact().unwrap() * &tau) + &(&phi / &Rational::from(2));
            prop_assert!(n.is_integer());
            prop_assert_eq!(n.to_integer().unwrap(), r.branch_integers[&level.label].clone());
        }
    }

    #[test]
    fn enumeration_grows_with_range(a in nonzero_rational(6), b in nonzero_rational(6), n in 1u32..6) {
        prop_assume!(a != b);
        let ps = PartialSpectrum::new(1.0, [("a", a), ("b", b)]).unwrap();
        let key = |c: &aaphase::constraint::CyclicityCandidate| (c.tau.clone(), c.phi_mod_2pi());
        let small: BTreeSet<_> = enumerate_candidates(&ps, n).unwrap().iter().map(key).collect();
        let large: BTreeSet<_> = enumerate_candidates(&ps, n + 1).unwrap().iter().map(key).collect();
        prop_assert!(small.is_subset(&large));
        prop_assert!(large.len() > small.len());
    }
}
