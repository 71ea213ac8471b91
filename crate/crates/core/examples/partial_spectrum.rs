//! Constraining periods, total phases and unseen eigenvalues from two known
//! eigenvalues.

use aaphase::constraint::{
    constrain_unknown, enumerate_candidates, gamma_candidates, gauge_to_zero_phi, phi_value, PartialSpectrum,
};
use aaphase::rational::Rational;

fn main() {
    let ps = PartialSpectrum::new(1.0, [("L1", Rational::from(2)), ("L2", Rational::from(3))]).unwrap();
    let candidates = enumerate_candidates(&ps, 3).unwrap();
    println!("{} candidates with |n|, |m| <= 3", candidates.len());
    for c in candidates.iter().take(6) {
        println!("  n {:>2} m {:>2}: tau {} x 2pi, phi {:.6}", c.n, c.m, c.tau, phi_value(c));
    }

    let gauged = gauge_to_zero_phi(&candidates[0], &ps).unwrap();
    println!("shortest loop: shift {}, constraint L n = {} k' with n = {}", gauged.shift, gauged.reference, gauged.n);
    for trial in ["1", "3/2", "4", "7/3"] {
        let t: Rational = trial.parse().unwrap();
        println!("  trial {trial}: admissible = {}", constrain_unknown(&gauged, &t));
    }

    let gammas = gamma_candidates(&ps, &candidates, 2.5).unwrap();
    println!("geometric phases for <H> = 2.5: {gammas:?}");
}
