//! The geometric phase is unchanged by a constant energy shift, and the
//! single-eigenvalue formulas reproduce the full-spectrum result.

use aaphase::phase::{
    angle_distance, gamma_from_single_eigenvalue_phi, gamma_from_single_eigenvalue_tau, gauge_shift, geometric_phase,
};
use aaphase::rational::Rational;
use aaphase::spectrum::{Spectrum, StateDecomposition};
use num_complex::Complex64;

fn main() {
    let s = Spectrum::new(1.0, [("a", Rational::frac(1, 2)), ("b", Rational::frac(5, 6)), ("c", Rational::frac(-1, 3))]).unwrap();
    let st = StateDecomposition::normalized(
        &s,
        [("a", Complex64::new(0.5, 0.1)), ("b", Complex64::new(0.3, -0.4)), ("c", Complex64::new(0.6, 0.0))],
    )
    .unwrap();
    let r = geometric_phase(&s, &st).unwrap();
    println!("tau {} x 2pi, phi {} pi, gamma {:.12}", r.tau.exact.as_ref().unwrap(), r.phi.exact.as_ref().unwrap(), r.gamma);

    for c in [Rational::frac(1, 7), Rational::from(-3), Rational::frac(11, 5)] {
        let shifted = geometric_phase(&gauge_shift(&s, &c), &st).unwrap();
        println!("shift {c:>5}: phi {} pi, gamma {:.12}", shifted.phi.exact.as_ref().unwrap(), shifted.gamma);
    }

    for level in s.levels() {
        let lambda = level.value.exact().unwrap();
        let via_phi = gamma_from_single_eigenvalue_phi(lambda, r.mean_energy, r.phi_branch_for(&level.label).unwrap()).unwrap();
        let via_tau = gamma_from_single_eigenvalue_tau(lambda, r.mean_energy, r.tau.value).unwrap();
        println!(
            "level {}: from phi {:.12}, from tau {:.12} (diffs {:.1e}, {:.1e})",
            level.label,
            via_phi,
            via_tau,
            angle_distance(via_phi, r.gamma),
            angle_distance(via_tau, r.gamma)
        );
    }
}
